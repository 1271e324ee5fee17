"""Dimensions of sheaf cohomology on projective space, on plane curves and on
quantized sheaves (products of twisted component sheaves).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .linalg import Echelon
from .poly import Poly, binomial

SHAPES = ("two_lines", "power")


# projective space ------------------------------------------------------------

def h_dim_projective_space(n: int, i: int, m: int) -> int:
    """dim H^i(P^n, O(m)) from the monomial description (H^n: all exponents negative)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if i == 0:
        return binomial(m + n, n) if m >= 0 else 0
    if i == n:
        # alpha_j = -1 - b_j with b_j >= 0 and sum b_j = -m - n - 1
        return binomial(-m - 1, n) if m <= -n - 1 else 0
    return 0


def negative_monomials(nvars: int, m: int) -> List[Tuple[int, ...]]:
    """Exponent vectors with every entry <= -1 and total m."""
    s = -m - nvars
    if s < 0:
        return []
    out = []

    def rec(i, left, acc):
        if i == nvars - 1:
            out.append(tuple(acc + [-1 - left]))
            return
        for b in range(left, -1, -1):
            rec(i + 1, left - b, acc + [-1 - b])

    rec(0, s, [])
    return out


# plane curves ----------------------------------------------------------------

def h1_plane_curve_formula(shape: str, d: int, m: int) -> int:
    """Closed form of dim H^1(Z, O_Z(m)) for Z = Z((x0 - x2) x1^(d-1)) or Z(x1^d)."""
    if shape not in SHAPES:
        raise ValueError(f"shape must be one of {SHAPES}")
    if shape == "two_lines" and d < 2:
        raise ValueError("the two-lines shape needs d >= 2")
    if d < 1:
        raise ValueError("degree must be >= 1")
    if m > d - 3:
        return 0
    if m > -3:
        return (-m + d - 1) * (-m + d - 2) // 2
    return d * (d - 2 * m - 3) // 2


def shape_form(shape: str, d: int) -> Poly:
    x0, x1, x2 = (Poly.var(3, i) for i in range(3))
    if shape == "two_lines":
        return (x0 - x2) * x1 ** (d - 1)
    if shape == "power":
        return x1 ** d
    raise ValueError(f"shape must be one of {SHAPES}")


def h1_plane_curve_oracle(f: Poly, m: int) -> int:
    """Kernel dimension of multiplication by f from H^2(O(m - d)) to H^2(O(m)) on P^2."""
    if f.nvars != 3:
        raise ValueError("plane curves live in three variables")
    d = f.homogeneous_degree()
    if d is None or not f:
        raise ValueError("f must be a nonzero form")
    source = negative_monomials(3, m - d)
    if not source:
        return 0
    ech = Echelon()
    for a in source:
        img = {}
        for e, c in f.terms.items():
            t = tuple(x + y for x, y in zip(a, e))
            if all(v < 0 for v in t):
                img[t] = img.get(t, 0) + c
        ech.add({k: v for k, v in img.items() if v})
    return len(source) - ech.dim


def h0_plane_curve(f: Poly, m: int) -> int:
    """dim H^0(Z, O_Z(m)) = dim (S/f)^m for m >= 0 and 0 otherwise."""
    d = f.homogeneous_degree()
    if m < 0:
        return 0
    return binomial(m + 2, 2) - binomial(m - d + 2, 2)


def euler_characteristic_plane_curve(d: int, m: int) -> int:
    return d * m - d * (d - 3) // 2


def detect_shape(f: Poly) -> Optional[Tuple[str, int]]:
    d = f.homogeneous_degree()
    if d is None or f.nvars != 3:
        return None
    for shape in SHAPES:
        if shape == "two_lines" and d < 2:
            continue
        if f.monic() == shape_form(shape, d).monic():
            return shape, d
    return None


# quantized sheaves ---------------------------------------------------------------

@dataclass
class CohomologyRow:
    i: int
    m: int                  # layer (radical weighted degree); twist is -m
    dim: int
    provenance: str         # closed-formula | oracle | both-agree | disagree
    notes: List[str] = field(default_factory=list)
    parts: List[Dict] = field(default_factory=list)

    def as_dict(self):
        return {"i": self.i, "m": self.m, "twist": -self.m, "dim": self.dim,
                "provenance": self.provenance, "notes": self.notes, "parts": self.parts}


@dataclass
class CohomologyTable:
    rows: List[CohomologyRow]
    notes: List[str] = field(default_factory=list)

    def value(self, i: int, m: int) -> Optional[int]:
        for r in self.rows:
            if r.i == i and r.m == m:
                return r.dim
        return None

    def r_table(self) -> Dict[int, int]:
        return {r.m: r.dim for r in self.rows if r.i == 1}

    def as_dict(self):
        return {"rows": [r.as_dict() for r in self.rows], "notes": self.notes}

    def render(self) -> str:
        lines = ["i  m  twist  dim  provenance"]
        for r in self.rows:
            lines.append(f"{r.i}  {r.m}  {-r.m}  {r.dim}  {r.provenance}")
            for n in r.notes:
                lines.append(f"   note: {n}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines)


def _component_h1(cls, twist: int) -> Tuple[int, str, str]:
    """(dim H^1, provenance, description) of one component sheaf at the twist."""
    kind = cls.kind
    if kind in ("zero", "point"):
        return 0, "closed-formula", kind
    if kind == "linear":
        if cls.degree == 1:
            # a line is P^1: degree-1 case of the plane-curve machinery
            oracle = h1_plane_curve_oracle(Poly.var(3, 0), twist)
            formula = h1_plane_curve_formula("power", 1, twist)
            return oracle, "both-agree" if oracle == formula else "disagree", "line"
        return h_dim_projective_space(cls.degree, 1, twist), "closed-formula", f"P^{cls.degree}"
    if kind == "plane_curve":
        f = cls.equation_poly
        oracle = h1_plane_curve_oracle(f, twist)
        shape = detect_shape(f)
        if shape is None:
            return oracle, "oracle", f"curve {f}"
        formula = h1_plane_curve_formula(shape[0], shape[1], twist)
        return oracle, "both-agree" if oracle == formula else "disagree", f"curve {f}"
    raise ValueError(f"no H^1 rule for component class '{kind}'")


def _component_h0(cls, twist: int) -> int:
    if cls.kind == "zero":
        return 0
    if cls.kind == "point":
        return cls.degree
    if cls.kind == "linear":
        return binomial(twist + cls.degree, cls.degree) if twist >= 0 else 0
    if cls.kind == "plane_curve":
        return h0_plane_curve(cls.equation_poly, twist)
    if cls.kind == "hypersurface" and twist <= 0:
        # connected for twist 0, no sections for negative twists
        return 1 if twist == 0 else 0
    raise ValueError(f"no H^0 rule for component class '{cls.kind}'")


def h1_quantized(layers, m_max: Optional[int] = None) -> CohomologyTable:
    """H^0 and H^1 of prod_m N_m(-m) by summing over the classified components."""
    rows: List[CohomologyRow] = []
    total_h0 = 0
    for lay in layers:
        if m_max is not None and lay.m > m_max:
            continue
        dims, tags, parts = 0, [], []
        for comp in lay.nonzero_components():
            if comp.cls.kind == "unclassified":
                raise ValueError(f"component {comp.name} at layer {lay.m} is unclassified")
            h, tag, desc = _component_h1_of(comp, lay)
            dims += h
            tags.append(tag)
            parts.append({"monomial": comp.name, "class": comp.cls.label(), "h1": h, "provenance": tag})
            total_h0 += _component_h0(comp.cls, lay.twist)
        prov = "disagree" if "disagree" in tags else (
            "both-agree" if "both-agree" in tags else ("oracle" if "oracle" in tags else "closed-formula"))
        rows.append(CohomologyRow(1, lay.m, dims, prov, [], parts))
    rows.insert(0, CohomologyRow(0, 0, total_h0, "closed-formula",
                                 ["sum over all layers; point components contribute their length"]))
    return CohomologyTable(rows)


def _component_h1_of(comp, lay) -> Tuple[int, str, str]:
    if comp.cls.kind == "hypersurface":
        raise ValueError(f"H^1 of the hypersurface component {comp.name} is out of scope")
    return _component_h1(comp.cls, lay.twist)


def two_lines_r_formula(d: int, k: int) -> int:
    """Closed form of r_k for the two-lines 2-quantization (layer 2k)."""
    if k == 0:
        return (d - 1) * (d - 2) // 2
    return (d - 1) * (d + 4 * k - 4) // 2


def two_lines_notes(table: CohomologyTable, d: int, k_max: int) -> None:
    """Attach the comparison with the d = 2 specialisation 4k - 2 of the closed form."""
    if d != 2:
        return
    for k in range(1, k_max + 1):
        v = table.value(1, 2 * k)
        if v is None:
            continue
        for r in table.rows:
            if r.i == 1 and r.m == 2 * k:
                r.notes.append(f"discrepancy: the d = 2 specialisation 4k-2 gives = {4 * k - 2}; "
                               f"the general formula and the oracle give 2k-1 = {v}")
