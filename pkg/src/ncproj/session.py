"""Loading algebra and chain definitions from JSON files.

File layout (all expression strings use the CLI grammar; "{...}" segments
are integer templates over "params"):

    {
      "name": "two_lines",
      "signature": {"n": 2, "q": 2},
      "params": {"d": 2},
      "bindings": {"y1": "[x0,x2]", ...},
      "layer_index": "weighted" | "halved",
      "layers": {"0": ["(x0-x2)*x1^{d-1}"], "1": [...]},
      "full_layers": [..], "zero_layers": [..],
      "tail": "zero" | "full" | {"pattern": [{"support": [...], "ideal": [...]}], "default": "full"},
      "base_ideal": ["(x0-x2)*x1^{d-1}"],
      "series_binding": {"y1": "t1", ...},
      "charts": {"h": "x0*x2"},
      "products": [{"chart": "U0", "expr": "[x1/x0, x2/x0]", "expected": "y2 + y3"}]
    }

With "layer_index": "halved" and q = 2 the key k means weighted degree 2k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .hall_lie import LieElement, eval_bracket_expr
from .ideals_chains import ChainSpec, GradedSubmodule, PatternRule, TailRule
from .nc_algebra import EnvelopingAlgebra, NCPoly, algebra
from .parsing import (UnknownSymbol, evaluate_chart, evaluate_nc, evaluate_ordered, parse, parse_poly,
                      substitute_params)
from .poly import Poly


class SessionError(ValueError):
    pass


@dataclass
class Session:
    alg: EnvelopingAlgebra
    bindings: Dict[str, LieElement] = field(default_factory=dict)
    params: Dict[str, int] = field(default_factory=dict)
    chain: Optional[ChainSpec] = None
    base_ideal: List[Poly] = field(default_factory=list)
    series_binding: Dict[str, str] = field(default_factory=dict)
    charts: Dict[str, Poly] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)
    name: str = ""

    @property
    def n(self) -> int:
        return self.alg.n_plus_1 - 1

    @property
    def q(self) -> int:
        return self.alg.q

    def expand(self, text: str) -> str:
        return substitute_params(text, self.params) if self.params else text

    def nc(self, text: str) -> NCPoly:
        return evaluate_nc(parse(self.expand(text)), self.alg, self.bindings)

    def ordered(self, text: str) -> NCPoly:
        return evaluate_ordered(parse(self.expand(text)), self.alg, self.bindings)

    def poly(self, text: str) -> Poly:
        return parse_poly(self.expand(text), self.alg.n_plus_1)

    def lie(self, text: str) -> LieElement:
        return eval_bracket_expr(self.alg.basis, self.expand(text), self.bindings)

    def chart(self, name: str):
        from .localization import Chart
        if name in self.charts:
            return Chart.from_factors(self.alg, [Poly.var(self.alg.n_plus_1, i)
                                                 for i in _variable_factors(self.charts[name])],
                                      name)
        return Chart.parse_name(self.alg, name)

    def chart_value(self, text: str, M: int, chart_name: Optional[str] = None):
        parsed = parse(self.expand(text))
        name = parsed.chart or chart_name
        if name is None:
            raise SessionError("chart expression needs a chart suffix such as @U0")
        chart = self.chart(name)
        return evaluate_chart(parsed, chart, M, self.bindings)

    def aliases(self) -> Dict[int, str]:
        """Radical position -> bound name, for bindings that are single radical basis elements."""
        out: Dict[int, str] = {}
        k = self.alg.n_plus_1
        for name, el in self.bindings.items():
            if len(el.terms) == 1 and abs(el.terms[0][1]) == 1 and el.terms[0][0] >= k:
                out.setdefault(el.terms[0][0] - k, name)
        return out

    def series_radicals(self) -> Dict[int, str]:
        """Radical position -> series variable from "series_binding"."""
        return {self.radical_index(name)[0]: var for name, var in self.series_binding.items()}

    def radical_index(self, name: str) -> tuple:
        """Radical position and sign for a name bound to +- one basis element."""
        el = self.lie(name)
        if len(el.terms) != 1 or abs(el.terms[0][1]) != 1:
            raise SessionError(f"'{name}' is not a single basis element up to sign")
        idx, c = el.terms[0]
        k = self.alg.n_plus_1
        if idx < k:
            raise SessionError(f"'{name}' is a generator, not a radical element")
        return idx - k, c


def _variable_factors(p: Poly) -> List[int]:
    if len(p.terms) != 1:
        raise SessionError("named charts must be monomials in the x variables")
    (e, _), = p.terms.items()
    if any(k > 1 for k in e):
        raise SessionError("named chart monomials must be squarefree")
    return [i for i, k in enumerate(e) if k]


def _layer_key(key: str, convention: str, q: int) -> int:
    m = int(key)
    if convention == "halved":
        return 2 * m if q == 2 else m
    if convention != "weighted":
        raise SessionError(f"unknown layer_index '{convention}'")
    return m


def load_dict(data: Dict[str, Any], params: Optional[Dict[str, int]] = None) -> Session:
    try:
        sig = data["signature"]
        n, q = int(sig["n"]), int(sig["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"missing or malformed signature: {exc}") from exc
    alg = algebra(n + 1, q)
    merged = dict(data.get("params", {}))
    merged.update(params or {})
    s = Session(alg, params={k: int(v) for k, v in merged.items()}, raw=data,
                name=data.get("name", ""))
    for name, expr in data.get("bindings", {}).items():
        try:
            s.bindings[name] = eval_bracket_expr(alg.basis, s.expand(expr), s.bindings)
        except (UnknownSymbol, ValueError) as exc:
            raise SessionError(f"binding '{name}': {exc}") from exc
    for name, expr in data.get("charts", {}).items():
        s.charts[name] = s.poly(expr)
    s.base_ideal = [s.poly(t) for t in data.get("base_ideal", [])]
    s.series_binding = dict(data.get("series_binding", {}))
    if "layers" in data or "tail" in data:
        s.chain = _load_chain(s, data)
    return s


def _load_chain(s: Session, data: Dict[str, Any]) -> ChainSpec:
    alg = s.alg
    conv = data.get("layer_index", "weighted")
    layers: Dict[int, GradedSubmodule] = {}
    for key, gens in data.get("layers", {}).items():
        m = _layer_key(key, conv, alg.q)
        try:
            layers[m] = GradedSubmodule(alg, m, [s.ordered(g) for g in gens])
        except (UnknownSymbol, ValueError) as exc:
            raise SessionError(f"layer {key}: {exc}") from exc
    for key in data.get("full_layers", []):
        m = _layer_key(str(key), conv, alg.q)
        layers[m] = GradedSubmodule.full(alg, m)
    for key in data.get("zero_layers", []):
        m = _layer_key(str(key), conv, alg.q)
        layers[m] = GradedSubmodule.zero(alg, m)
    tail = _load_tail(s, data.get("tail", "zero"))
    return ChainSpec(alg, layers, tail, data.get("name", ""), {"params": dict(s.params)})


def _load_tail(s: Session, rule) -> TailRule:
    if rule in ("zero", "full"):
        return TailRule(rule)
    if not isinstance(rule, dict) or "pattern" not in rule:
        raise SessionError("tail must be 'zero', 'full' or {'pattern': [...]}")
    rules = []
    for r in rule["pattern"]:
        support = tuple(sorted(s.radical_index(name)[0] for name in r["support"]))
        ideal = tuple(s.poly(t) for t in r.get("ideal", []))
        rules.append(PatternRule(support, ideal))
    return TailRule("pattern", tuple(rules), rule.get("default", "full"))


def load_file(path: Union[str, Path], params: Optional[Dict[str, int]] = None) -> Session:
    p = Path(path)
    if not p.exists():
        bundled = bundled_path(str(path))
        if bundled is None:
            raise SessionError(f"no such file: {path}")
        p = bundled
    with open(p) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SessionError(f"{p}: invalid JSON ({exc})") from exc
    return load_dict(data, params)


def bundled_names() -> List[str]:
    root = resources.files("ncproj") / "examples"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str) -> Optional[Path]:
    stem = Path(name).name
    if stem.endswith(".json"):
        stem = stem[:-5]
    root = resources.files("ncproj") / "examples"
    cand = root / f"{stem}.json"
    return Path(str(cand)) if cand.is_file() else None


def load_bundled(name: str, params: Optional[Dict[str, int]] = None) -> Session:
    p = bundled_path(name)
    if p is None:
        raise SessionError(f"no bundled example '{name}'")
    return load_file(p, params)
