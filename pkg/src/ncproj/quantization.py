"""Quotient layers N_m = (S (x) R^m) / I_m of a chain, their per-monomial
components, the formal series counting those components, products on charts
reduced modulo the component ideals, and Lie-space quotient dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ideals_chains import ChainSpec, GradedSubmodule, _ideal_span, minimal_generators
from .localization import Chart, ChartElement, ChartError, RationalFn, chart_commutator, chart_multiply
from .linalg import Echelon
from .nc_algebra import EnvelopingAlgebra, radical_monomials
from .poly import Exp, Poly, binomial, monomial_str
from .series import PowerSeries, SeriesError, geometric_derivative_series


# component classification -----------------------------------------------------

@dataclass(frozen=True)
class ComponentClass:
    """kind is zero, point, linear, plane_curve, hypersurface or unclassified.

    point: `degree` is the length (number of points with multiplicity) on the
    line cut out by `forms`; linear: `degree` is the dimension of the linear
    subspace Z(forms); plane_curve: `equation` of degree `degree` inside the
    plane Z(forms); hypersurface: `equation` of degree `degree` inside the
    linear space Z(forms) of dimension `ambient`.
    """
    kind: str
    forms: Tuple[str, ...] = ()
    degree: int = 0
    equation: str = ""
    ambient: int = 0
    equation_poly: Optional[Poly] = field(default=None, compare=False)

    def label(self) -> str:
        zf = "Z(" + ", ".join(self.forms + ((self.equation,) if self.equation else ())) + ")"
        if self.kind == "zero":
            return "empty"
        if self.kind == "point":
            return f"point {zf}" if self.degree == 1 else f"points[{self.degree}] {zf}"
        if self.kind == "linear":
            if self.degree == 1:
                return f"line {zf}"
            return f"P^{self.degree} {zf}" if self.forms else f"P^{self.degree}"
        if self.kind == "plane_curve":
            return f"curve[{self.degree}] {zf}"
        if self.kind == "hypersurface":
            return f"hypersurface[{self.degree}] in P^{self.ambient} {zf}"
        return "unclassified"

    def predicted_hilbert(self, e: int) -> Optional[int]:
        if self.kind == "zero":
            return None
        if self.kind == "point":
            return min(e + 1, self.degree)
        if self.kind == "linear":
            return binomial(e + self.degree, self.degree)
        if self.kind == "plane_curve":
            return binomial(e + 2, 2) - binomial(e - self.degree + 2, 2)
        if self.kind == "hypersurface":
            a = self.ambient
            return binomial(e + a, a) - binomial(e - self.degree + a, a)
        return None

    def as_dict(self):
        return {"kind": self.kind, "forms": list(self.forms), "degree": self.degree,
                "equation": self.equation, "ambient": self.ambient, "label": self.label()}


UNCLASSIFIED = ComponentClass("unclassified")


def _eliminate_linear(linear: Sequence[Poly], nvars: int) -> Tuple[Dict[int, Poly], List[int]]:
    """Substitution x_p -> (linear form) solving the linear generators."""
    ech = Echelon(dict(f.terms) for f in linear)
    subs: Dict[int, Poly] = {}
    for p, row in ech.rows.items():
        var = p.index(1)
        rest = Poly(nvars, {e: -c for e, c in row.items() if e != p})
        subs[var] = rest
    # make the substitution triangular-free: no pivot variable on a right-hand side
    changed = True
    while changed:
        changed = False
        for v, r in list(subs.items()):
            if r.variables() & subs.keys():
                subs[v] = r.substitute({u: subs[u] for u in r.variables() & subs.keys()})
                changed = True
    free = [i for i in range(nvars) if i not in subs]
    return subs, free


def classify(gens: Sequence[Poly], nvars: int, hilbert: Sequence[int]) -> ComponentClass:
    """Best-effort geometric type of Proj(S/(gens)), checked against its Hilbert function."""
    names = [f"x{i}" for i in range(nvars)]
    if any(g.is_constant() for g in gens):
        return ComponentClass("zero")
    linear = [g for g in gens if g.homogeneous_degree() == 1]
    higher = [g for g in gens if g.homogeneous_degree() != 1]
    subs, free = _eliminate_linear(linear, nvars)
    rest = [g.substitute(subs) if subs else g for g in higher]
    rest = [g for g in rest if g]
    top = max((g.degree() for g in rest), default=0)
    rest = minimal_generators(rest, nvars, top) if rest else []
    forms = tuple(f.to_str(names) for f in linear)
    k = len(free)
    if not rest:
        if k == 0:
            cls = ComponentClass("zero")
        elif k == 1:
            cls = ComponentClass("point", forms, 1)
        else:
            cls = ComponentClass("linear", forms, k - 1)
    elif len(rest) == 1:
        g = rest[0]
        e = g.degree()
        if k == 1:
            cls = ComponentClass("zero")
        elif k == 2:
            cls = ComponentClass("point", forms, e, g.to_str(names))
        elif k == 3:
            plane = Poly(3, {tuple(x[i] for i in free): c for x, c in g.terms.items()})
            cls = ComponentClass("plane_curve", forms, e, g.to_str(names), 2, plane)
        else:
            cls = ComponentClass("hypersurface", forms, e, g.to_str(names), k - 1)
    else:
        return UNCLASSIFIED
    if cls.kind == "zero":
        return cls if hilbert and hilbert[-1] == 0 else UNCLASSIFIED
    for e, h in enumerate(hilbert):
        if cls.predicted_hilbert(e) != h:
            return UNCLASSIFIED
    return cls


# component ideals -------------------------------------------------------------

def _is_split(layer: GradedSubmodule) -> bool:
    k = layer.alg.n_plus_1
    return all(len({e[k:] for e in g.terms}) == 1 for g in layer.generators)


def component_ideal(chain: ChainSpec, alpha: Exp, d_max: int) -> List[Poly]:
    """Generators of I_{m,alpha} = {c in S : c y^alpha in I_m}."""
    alg = chain.alg
    k = alg.n_plus_1
    m = alg.weighted_degree((0,) * k + tuple(alpha))
    layer = chain.layer(m)
    if layer.kind == "full":
        return [Poly.constant(k, 1)]
    if layer.kind == "zero":
        return []
    if _is_split(layer):
        out = []
        for g in layer.generators:
            (e0,) = {e[k:] for e in g.terms}
            if e0 == tuple(alpha):
                out.append(Poly(k, {e[:k]: c for e, c in g.terms.items()}))
        top = max((p.degree() for p in out), default=0)
        return minimal_generators(out, k, top)
    rows = []
    for e in range(d_max + 1):
        for row in layer.alpha_ideal_dims(tuple(alpha), e + m).basis():
            rows.append(Poly(k, row))
    return minimal_generators(rows, k, d_max)


@dataclass
class Component:
    alpha: Exp
    name: str
    generators: List[Poly]
    hilbert: List[int]
    cls: ComponentClass

    @property
    def nonzero(self) -> bool:
        return self.cls.kind != "zero"

    def as_dict(self, names=None):
        nm = [f"x{i}" for i in range(self.generators[0].nvars)] if self.generators else None
        return {"monomial": self.name, "ideal": [g.to_str(nm) for g in self.generators],
                "class": self.cls.as_dict(), "hilbert": self.hilbert}


@dataclass
class QuotientLayer:
    m: int
    twist: int
    components: Dict[Exp, Component]
    split: bool
    hilbert: List[int]

    def nonzero_components(self) -> List[Component]:
        return [c for c in self.components.values() if c.nonzero]

    def as_dict(self):
        return {"m": self.m, "twist": self.twist, "split": self.split, "hilbert": self.hilbert,
                "components": [c.as_dict() for c in self.components.values() if c.nonzero],
                "zero_components": sum(1 for c in self.components.values() if not c.nonzero)}


def radical_name(alg: EnvelopingAlgebra, alpha: Exp, aliases: Optional[Mapping[int, str]] = None) -> str:
    k = alg.n_plus_1
    names = [(aliases or {}).get(t) or alg.basis.label(k + t) for t in range(alg.nvars - k)]
    return monomial_str(alpha, names) or "1"


def build_quotients(chain: ChainSpec, m_max: int, d_max: int,
                    aliases: Optional[Mapping[int, str]] = None) -> List[QuotientLayer]:
    """Per layer m <= m_max and monomial y^alpha: ideal, Hilbert function up to d_max, class."""
    alg = chain.alg
    k = alg.n_plus_1
    out = []
    for m in range(m_max + 1):
        alphas = radical_monomials(alg, m)
        if not alphas:
            continue
        layer = chain.layer(m)
        split = layer.kind != "span" or _is_split(layer)
        comps: Dict[Exp, Component] = {}
        for alpha in alphas:
            gens = component_ideal(chain, alpha, d_max)
            hil = [binomial(e + k - 1, k - 1) - _ideal_span(gens, k, e).dim for e in range(d_max + 1)]
            comps[alpha] = Component(alpha, radical_name(alg, alpha, aliases), gens, hil,
                                     classify(gens, k, hil))
        if split:
            total = [sum(c.hilbert[e] for c in comps.values()) for e in range(d_max + 1)]
        else:
            total = [layer.ambient_dim(e + m) - layer.dim(e + m) for e in range(d_max + 1)]
        out.append(QuotientLayer(m, -m, comps, split, total))
    return out


# series invariant ---------------------------------------------------------------

@dataclass
class SeriesExpr:
    series: PowerSeries
    legend: Dict[str, Dict] = field(default_factory=dict)

    def as_dict(self):
        return {"variables": list(self.series.names), "weights": list(self.series.weights),
                "order": self.series.order, "expansion": self.series.to_str(),
                "legend": self.legend}


def series_invariant(layers: Sequence[QuotientLayer], binding: Mapping[int, str],
                     alg: EnvelopingAlgebra, aliases: Optional[Mapping[int, str]] = None) -> SeriesExpr:
    """Count non-empty components: y^alpha contributes prod binding[y_i]^alpha_i."""
    k = alg.n_plus_1
    ny = alg.nvars - k
    names: List[str] = []
    weights: Dict[str, int] = {}
    for t in sorted(binding):
        v = binding[t]
        w = alg.weights[k + t]
        if weights.setdefault(v, w) != w:
            raise SeriesError(f"variable '{v}' bound to radicals of different weights")
        if v not in names:
            names.append(v)
    names.sort(key=lambda s: (len(s), s))
    order = max((lay.m for lay in layers), default=0)
    coeffs: Dict[Exp, Fraction] = {}
    legend: Dict[str, Dict] = {v: {"weight": weights[v], "radicals": [], "classes": set()} for v in names}
    for t in sorted(binding):
        legend[binding[t]]["radicals"].append(radical_name(alg, tuple(1 if s == t else 0 for s in range(ny)), aliases))
    for lay in layers:
        for comp in lay.nonzero_components():
            e = [0] * len(names)
            for t, a in enumerate(comp.alpha):
                if not a:
                    continue
                if t not in binding:
                    raise SeriesError(f"component {comp.name} ({comp.cls.label()}) has an unbound radical")
                e[names.index(binding[t])] += a
                if sum(comp.alpha) == 1:
                    legend[binding[t]]["classes"].add(f"{comp.cls.label()} twist {lay.twist}")
            key = tuple(e)
            coeffs[key] = coeffs.get(key, 0) + 1
    for v in legend.values():
        v["classes"] = sorted(v["classes"])
    return SeriesExpr(PowerSeries(names, [weights[v] for v in names], order, coeffs), legend)


def layer_counts(layers: Sequence[QuotientLayer]) -> Dict[int, int]:
    return {lay.m: len(lay.nonzero_components()) for lay in layers}


def free_sheaf_series(alg: EnvelopingAlgebra, order: int) -> PowerSeries:
    """prod over degrees i of (1/n_i!) d^{n_i}/dt_i^{n_i} (1 - t_i)^-1, n_i + 1 = #radicals of degree i."""
    k = alg.n_plus_1
    counts: Dict[int, int] = {}
    for w in alg.weights[k:]:
        counts[w] = counts.get(w, 0) + 1
    degs = sorted(counts)
    names = [f"t{d}" for d in degs]
    base = PowerSeries(names, degs, order)
    out = base.constant(1)
    for d, name in zip(degs, names):
        out = out * geometric_derivative_series(base, name, counts[d] - 1)
    return out


# products on charts reduced modulo the component ideals ---------------------

def _sympy():
    import sympy
    return sympy


def _to_sympy(p: Poly, syms):
    sp = _sympy()
    expr = 0
    for e, c in p.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, e):
            if k:
                term *= s ** k
        expr += term
    return expr


def _from_sympy(expr, syms, nvars) -> Poly:
    sp = _sympy()
    if expr == 0:
        return Poly(nvars)
    P = sp.Poly(expr, *syms)
    return Poly(nvars, {tuple(int(v) for v in mono): Fraction(int(c.p), int(c.q)) for mono, c in P.terms()})


class QuotientReducer:
    """Normal forms of chart coefficients on Z(I_{m,alpha}) in affine coordinates x_t = 1."""

    def __init__(self, chain: ChainSpec, chart: Chart, d_max: int = 8):
        k = chain.alg.n_plus_1
        std = [i for i in range(k) if chart.contains_standard(i)]
        if not std:
            raise ChartError("quotient products need a chart inside some standard chart U_i")
        for f in chart.factors:
            if len(f.terms) != 1 or f.degree() != 1:
                raise ChartError("quotient products support charts cut out by coordinate variables")
        self.chain = chain
        self.chart = chart
        self.t = std[0]
        self.k = k
        self.d_max = d_max
        sp = _sympy()
        self.syms = sp.symbols(" ".join(f"x{i}" for i in range(k)) + " _", seq=True)[:k]
        self._bases: Dict[Exp, object] = {}

    def _dehom(self, p: Poly) -> Poly:
        return p.substitute({self.t: Poly.constant(self.k, 1)})

    def basis_for(self, alpha: Exp):
        hit = self._bases.get(alpha)
        if hit is None:
            sp = _sympy()
            gens = [self._dehom(g) for g in component_ideal(self.chain, alpha, self.d_max)]
            gens = [_to_sympy(g, self.syms) for g in gens if g]
            free = [s for i, s in enumerate(self.syms) if i != self.t]
            if not gens:
                hit = None
            else:
                hit = sp.groebner(gens, *free, order="grevlex") if free else sp.groebner(gens, order="grevlex")
            self._bases[alpha] = hit
        return hit if hit is not None else False

    def reduce_coefficient(self, alpha: Exp, r: RationalFn) -> RationalFn:
        sp = _sympy()
        G = self.basis_for(alpha)
        k = self.k
        num = self._dehom(r.num)
        free = [s for i, s in enumerate(self.syms) if i != self.t]
        if G is not False:
            if list(G.exprs) == [1]:
                return RationalFn.poly(Poly(k), self.chart.factors)
            # a denominator vanishing on the component makes the restriction undefined
            for f, e in zip(self.chart.factors, r.den):
                v = next(iter(f.terms))
                if e and v.index(1) != self.t:
                    test = _to_sympy(self._dehom(f), self.syms)
                    if G.reduce(test ** (k + 1))[1] == 0:
                        raise ChartError(f"denominator {f} vanishes on the component of {alpha}")
            expr = _to_sympy(num, self.syms)
            rem = G.reduce(expr)[1] if free else expr
            num = _from_sympy(sp.expand(rem), self.syms, k)
        # rehomogenise to degree 0 with the trivialising variable x_t
        den = [0 if f == Poly.var(k, self.t) else e for f, e in zip(self.chart.factors, r.den)]
        den_deg = sum(den)
        extra = 0
        for e, c in num.terms.items():
            extra = max(extra, sum(e) - den_deg)
        t_idx = [i for i, f in enumerate(self.chart.factors) if f == Poly.var(k, self.t)][0]
        total: Dict[Exp, Fraction] = {}
        for e, c in num.terms.items():
            lift = den_deg + extra - sum(e)
            ne = tuple(v + (lift if i == self.t else 0) for i, v in enumerate(e))
            total[ne] = total.get(ne, 0) + c
        den[t_idx] = extra
        return RationalFn(Poly(k, total), den, self.chart.factors)

    def reduce(self, w: ChartElement) -> ChartElement:
        if w.chart != self.chart:
            raise ChartError("chart mismatch")
        out = {}
        for a, r in w.layers.items():
            rr = self.reduce_coefficient(a, r)
            if rr:
                out[a] = rr
        return ChartElement(self.chart, w.M, out)


def quotient_chart_product(chain: ChainSpec, chart: Chart, a: ChartElement, b: ChartElement,
                           commutator: bool = False, d_max: int = 8) -> ChartElement:
    """Chart product (or commutator) with each y^alpha coefficient restricted to its component.

    Coefficients are written in the trivialisation x_t = 1 of the first standard
    factor of the chart, so a unit such as 1/x_t^m prints as 1.
    """
    w = chart_commutator(a, b) if commutator else chart_multiply(a, b)
    return QuotientReducer(chain, chart, d_max).reduce(w)


# Lie-space quotients -------------------------------------------------------------

def _pair_index(alg: EnvelopingAlgebra) -> Dict[Tuple[int, int], int]:
    k = alg.n_plus_1
    out = {}
    for t in range(alg.nvars - k):
        el = alg.basis.elements[k + t]
        if el.degree == 2:
            out[(el.word[0], el.word[1])] = t
    return out


def lie_space_quotient(alg: EnvelopingAlgebra, m_max: int) -> Dict[int, int]:
    """dim of R^m modulo the Lie-space relations, for weighted degrees m <= m_max.

    q = 2: y_ij y_sl = 0 when the pairs share an index, and
    y_ij y_sl + y_is y_jl = 0 for i<j, s<l distinct, reading y_ba as -y_ab.
    q = 3: every product involving a degree-3 radical and another radical is 0,
    and the q = 2 four-index relation holds after multiplying by any y_up.
    """
    if alg.q not in (2, 3):
        raise ValueError("Lie-space relations are known only for q in {2, 3}")
    k = alg.n_plus_1
    ny = alg.nvars - k
    pairs = _pair_index(alg)

    def y(i, j):
        return (pairs[(i, j)], 1) if i < j else (pairs[(j, i)], -1)

    def unit(t):
        return tuple(1 if s == t else 0 for s in range(ny))

    quad: List[Dict[Exp, Fraction]] = []
    zero_monos: List[Exp] = []
    if alg.q == 2:
        for (i, j), t in pairs.items():
            for (s, l), u in pairs.items():
                if {i, j} & {s, l} and t <= u:
                    zero_monos.append(tuple(a + b for a, b in zip(unit(t), unit(u))))
    deg3 = [t for t in range(ny) if alg.weights[k + t] == 3]
    for t in deg3:
        for u in range(ny):
            if t <= u or alg.weights[k + u] == 2:
                zero_monos.append(tuple(a + b for a, b in zip(unit(t), unit(u))))
    for i in range(k):
        for j in range(i + 1, k):
            for s in range(k):
                for l in range(s + 1, k):
                    if len({i, j, s, l}) < 4:
                        continue
                    (a, sa), (b, sb) = y(i, j), y(s, l)
                    (c, sc), (d, sd) = y(i, s), y(j, l)
                    rel: Dict[Exp, Fraction] = {}
                    for (p, r, sg) in ((a, b, sa * sb), (c, d, sc * sd)):
                        e = tuple(x + z for x, z in zip(unit(p), unit(r)))
                        rel[e] = rel.get(e, 0) + sg
                    rel = {e: Fraction(c) for e, c in rel.items() if c}
                    if rel:
                        quad.append(rel)
    # the four-index relation is quadratic for q = 2 and cubic (times some y_up) for q = 3
    degree_two = [t for t in range(ny) if alg.weights[k + t] == 2]
    out: Dict[int, int] = {}
    weights = alg.weights[k:]
    for m in range(m_max + 1):
        monos = radical_monomials(alg, m)
        if not monos:
            continue
        ech = Echelon()
        for z in zero_monos:
            wz = sum(a * w for a, w in zip(z, weights))
            for g in radical_monomials(alg, m - wz) if m >= wz else []:
                ech.add({tuple(a + b for a, b in zip(z, g)): Fraction(1)})
        for rel in quad:
            shifts = []
            if alg.q == 2:
                if m >= 4:
                    shifts = radical_monomials(alg, m - 4)
            else:
                if m >= 6:
                    shifts = [tuple(a + b for a, b in zip(unit(u), g))
                              for u in degree_two for g in radical_monomials(alg, m - 6)]
            for g in shifts:
                ech.add({tuple(a + b for a, b in zip(e, g)): c for e, c in rel.items()})
        out[m] = len(monos) - ech.dim
    return out
