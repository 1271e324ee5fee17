"""Truncated chart algebra: rational x-coefficients times radical monomials.

A chart is fixed by a list of monic denominator factors (x_i for the
standard charts U_i).  Chart elements are maps from radical exponent
vectors alpha (weighted degree < M) to rational functions whose
denominators are products of chart factors.

Products use the constant-coefficient bidifferential expansion of the
PBW product:  (r y^a)(s y^b) = sum K (d^sig r)(d^rho s) y^g,  where
K * sig! * rho! is the x-free coefficient of y^g in (x^sig y^a)(x^rho y^b).
Translations x_i -> x_i + c_i fix every y, which makes the expansion
constant-coefficient and lets it act on rational r, s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .nc_algebra import EnvelopingAlgebra, NCPoly, multiply
from .poly import Exp, Poly, add_exp, exp_factorial, monomials_of_degree, render_terms

ChartOp = Callable[["ChartElement"], "ChartElement"]


class ChartError(ValueError):
    pass


# rational functions ---------------------------------------------------------

class RationalFn:
    """num / prod(factors[k]^den[k]) with the factors fixed by a chart."""

    __slots__ = ("num", "den", "factors", "_hash")

    def __init__(self, num: Poly, den: Sequence[int], factors: Tuple[Poly, ...]):
        if len(den) != len(factors):
            raise ValueError("denominator exponents do not match the factors")
        if any(e < 0 for e in den):
            raise ValueError("negative denominator exponent")
        num, den = _cancel(num, list(den), factors)
        self.num = num
        self.den = tuple(den)
        self.factors = factors
        self._hash = None

    @classmethod
    def poly(cls, p: Poly, factors) -> "RationalFn":
        return cls(p, (0,) * len(factors), factors)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def denominator(self) -> Poly:
        out = Poly.constant(self.nvars, 1)
        for f, e in zip(self.factors, self.den):
            if e:
                out = out * f ** e
        return out

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return not any(self.den)

    def homogeneous_degree(self) -> Optional[int]:
        if not self.num:
            return None
        d = self.num.homogeneous_degree()
        if d is None:
            return None
        for f, e in zip(self.factors, self.den):
            fd = f.homogeneous_degree()
            if fd is None:
                return None
            d -= fd * e
        return d

    def _lift(self, den: Sequence[int]) -> Poly:
        """Numerator rewritten over the larger denominator exponents den."""
        out = self.num
        for f, mine, target in zip(self.factors, self.den, den):
            if target > mine:
                out = out * f ** (target - mine)
        return out

    def _coerce(self, other) -> "RationalFn":
        if isinstance(other, RationalFn):
            if other.factors != self.factors:
                raise ChartError("rational functions live on different charts")
            return other
        if isinstance(other, Poly):
            return RationalFn.poly(other, self.factors)
        return RationalFn.poly(Poly.constant(self.nvars, other), self.factors)

    def __add__(self, other):
        other = self._coerce(other)
        den = [max(a, b) for a, b in zip(self.den, other.den)]
        return RationalFn(self._lift(den) + other._lift(den), den, self.factors)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, self.factors)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (RationalFn, Poly)):
            return RationalFn(self.num * Fraction(other), self.den, self.factors)
        other = self._coerce(other)
        return RationalFn(self.num * other.num,
                          [a + b for a, b in zip(self.den, other.den)], self.factors)

    __rmul__ = __mul__

    def divide_by_factors(self, exps: Sequence[int]) -> "RationalFn":
        return RationalFn(self.num, [a + b for a, b in zip(self.den, exps)], self.factors)

    def diff(self, i: int) -> "RationalFn":
        """Quotient rule: d(N/prod f^e) = (N' prod f - N sum e_k f_k' prod_{l!=k} f_l) / prod f^{e+1}."""
        if not any(self.den):
            return RationalFn(self.num.diff(i), self.den, self.factors)
        involved = [k for k, e in enumerate(self.den) if e]
        one_more = list(self.den)
        for k in involved:
            one_more[k] += 1
        num = self.num.diff(i)
        for k in involved:
            num = num * self.factors[k]
        for k in involved:
            fk = self.factors[k].diff(i)
            if not fk:
                continue
            rest = self.num * fk * self.den[k]
            for l in involved:
                if l != k:
                    rest = rest * self.factors[l]
            num = num - rest
        return RationalFn(num, one_more, self.factors)

    def diff_multi(self, sigma: Exp) -> "RationalFn":
        out = self
        for i, k in enumerate(sigma):
            for _ in range(k):
                out = out.diff(i)
                if not out:
                    return out
        return out

    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return (self.factors == other.factors and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def to_str(self, names=None) -> str:
        num = self.num.to_str(names)
        if not any(self.den):
            return num
        den_parts = []
        for f, e in zip(self.factors, self.den):
            if e:
                fs = f.to_str(names)
                if len(f.terms) > 1:
                    fs = f"({fs})"
                den_parts.append(fs if e == 1 else f"{fs}^{e}")
        den = "*".join(den_parts)
        if len(self.num.terms) > 1:
            num = f"({num})"
        if len(den_parts) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __str__(self):
        return self.to_str()

    __repr__ = __str__


def _cancel(num: Poly, den: List[int], factors) -> Tuple[Poly, List[int]]:
    if not num:
        return num, [0] * len(den)
    for k, f in enumerate(factors):
        while den[k] > 0:
            q = num.divide_exact(f)
            if q is None:
                break
            num = q
            den[k] -= 1
    return num, den


# charts ----------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    alg: EnvelopingAlgebra
    factors: Tuple[Poly, ...]
    name: str = ""

    @staticmethod
    def standard(alg: EnvelopingAlgebra, indices: Sequence[int]) -> "Chart":
        k = alg.n_plus_1
        for i in indices:
            if not 0 <= i < k:
                raise ChartError(f"chart index {i} out of range")
        idx = sorted(set(indices))
        facs = tuple(Poly.var(k, i) for i in idx)
        return Chart(alg, facs, "U" + "".join(map(str, idx)))

    @staticmethod
    def from_factors(alg: EnvelopingAlgebra, factors: Sequence[Poly], name: str = "") -> "Chart":
        facs = []
        for f in factors:
            if f.nvars != alg.n_plus_1 or f.homogeneous_degree() is None or f.is_constant():
                raise ChartError("chart factors must be non-constant homogeneous forms in x")
            facs.append(f.monic())
        return Chart(alg, tuple(facs), name)

    @staticmethod
    def parse_name(alg: EnvelopingAlgebra, name: str) -> "Chart":
        """U<digits> is the intersection of the standard charts named by the digits."""
        if not name.startswith("U") or not name[1:].isdigit():
            raise ChartError(f"unknown chart '{name}'")
        digits = name[1:]
        if alg.n_plus_1 > 10:
            return Chart.standard(alg, [int(digits)])
        return Chart.standard(alg, [int(c) for c in digits])

    def h(self) -> Poly:
        out = Poly.constant(self.alg.n_plus_1, 1)
        for f in self.factors:
            out = out * f
        return out

    def factor_exponents(self, p: Poly) -> Optional[Tuple[Fraction, Tuple[int, ...]]]:
        """Write p = c * prod factors^e, or None when that is impossible."""
        if not p:
            return None
        exps = [0] * len(self.factors)
        cur = p
        for k, f in enumerate(self.factors):
            while True:
                q = cur.divide_exact(f)
                if q is None:
                    break
                cur = q
                exps[k] += 1
        if not cur.is_constant():
            return None
        return cur.constant_term(), tuple(exps)

    def contains_standard(self, i: int) -> bool:
        return Poly.var(self.alg.n_plus_1, i) in self.factors

    def rational(self, p: Poly, den: Optional[Sequence[int]] = None) -> RationalFn:
        return RationalFn(p, den or (0,) * len(self.factors), self.factors)

    def label(self) -> str:
        if self.name:
            return self.name
        return "h=" + self.h().to_str()


# chart elements ------------------------------------------------------------

class ChartElement:
    __slots__ = ("chart", "M", "layers")

    def __init__(self, chart: Chart, M: int, layers: Optional[Dict[Exp, RationalFn]] = None):
        self.chart = chart
        self.M = M
        alg = chart.alg
        out = {}
        for a, r in (layers or {}).items():
            a = tuple(a)
            if r and _rad_weight(alg, a) < M:
                out[a] = r
        self.layers: Dict[Exp, RationalFn] = out

    @property
    def alg(self) -> EnvelopingAlgebra:
        return self.chart.alg

    def _check(self, other: "ChartElement"):
        if other.chart != self.chart:
            raise ChartError("chart mismatch")
        if other.M != self.M:
            raise ChartError("truncation mismatch")

    def is_zero(self) -> bool:
        return not self.layers

    def __bool__(self):
        return bool(self.layers)

    def __add__(self, other):
        if not isinstance(other, ChartElement):
            other = scalar(self.chart, self.M, other)
        self._check(other)
        d = dict(self.layers)
        for a, r in other.layers.items():
            d[a] = d[a] + r if a in d else r
        return ChartElement(self.chart, self.M, d)

    __radd__ = __add__

    def __neg__(self):
        return ChartElement(self.chart, self.M, {a: -r for a, r in self.layers.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "ChartElement":
        return ChartElement(self.chart, self.M, {a: r * Fraction(c) for a, r in self.layers.items()})

    def coeff_mul(self, r: RationalFn) -> "ChartElement":
        """Diagonal multiplication of every layer by r."""
        return ChartElement(self.chart, self.M, {a: v * r for a, v in self.layers.items()})

    def __mul__(self, other):
        if isinstance(other, ChartElement):
            return chart_multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, ChartElement):
            return NotImplemented
        return self.chart == other.chart and self.M == other.M and self.layers == other.layers

    def __hash__(self):
        return hash(frozenset(self.layers.items()))

    def truncate(self, M: int) -> "ChartElement":
        return ChartElement(self.chart, M, {a: r for a, r in self.layers.items()
                                            if _rad_weight(self.alg, a) < M})

    def filtration_level(self) -> Optional[int]:
        return min((_rad_weight(self.alg, a) for a in self.layers), default=None)

    def layer_part(self, m: int) -> "ChartElement":
        return ChartElement(self.chart, self.M, {a: r for a, r in self.layers.items()
                                                 if _rad_weight(self.alg, a) == m})

    def chart_degree(self) -> Optional[int]:
        degs = set()
        for a, r in self.layers.items():
            d = r.homogeneous_degree()
            if d is None:
                return None
            degs.add(d + _rad_weight(self.alg, a))
        return degs.pop() if len(degs) == 1 else None

    def sorted_layers(self):
        alg = self.alg
        return sorted(self.layers.items(), key=lambda t: (_rad_weight(alg, t[0]), tuple(-k for k in t[0])))

    def __str__(self):
        return render(self)

    __repr__ = __str__


def _rad_weight(alg: EnvelopingAlgebra, a: Exp) -> int:
    return sum(k * w for k, w in zip(a, alg.weights[alg.n_plus_1:]))


def _y_label(alg: EnvelopingAlgebra, a: Exp) -> str:
    parts = []
    k0 = alg.n_plus_1
    for t, k in enumerate(a):
        if k:
            name = alg.basis.label(k0 + t)
            parts.append(name if k == 1 else f"{name}^{k}")
    return "*".join(parts)


def render(w: ChartElement) -> str:
    """Layers by radical weight then lex alpha, each as "coefficient*y^alpha"."""
    if not w.layers:
        return "0"
    alg = w.alg
    out = []
    for a, r in w.sorted_layers():
        # pull a sign out of single-term numerators for readability
        neg = len(r.num.terms) == 1 and next(iter(r.num.terms.values())) < 0
        rr = -r if neg else r
        coeff = rr.to_str()
        y = _y_label(alg, a)
        if y:
            if coeff == "1":
                body = y
            else:
                if "+" in coeff or " - " in coeff:
                    if not coeff.startswith("("):
                        coeff = f"({coeff})"
                body = f"{coeff}*{y}"
        else:
            body = coeff
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# constructors ----------------------------------------------------------------

def scalar(chart: Chart, M: int, c) -> ChartElement:
    k = chart.alg.n_plus_1
    ny = chart.alg.nvars - k
    return ChartElement(chart, M, {(0,) * ny: chart.rational(Poly.constant(k, c))})


def from_rational(chart: Chart, M: int, r: RationalFn, alpha: Optional[Exp] = None) -> ChartElement:
    ny = chart.alg.nvars - chart.alg.n_plus_1
    return ChartElement(chart, M, {alpha or (0,) * ny: r})


def from_ncpoly(chart: Chart, M: int, a: NCPoly) -> ChartElement:
    alg = chart.alg
    if a.alg != alg:
        raise ValueError("basis mismatch")
    k = alg.n_plus_1
    layers: Dict[Exp, Poly] = {}
    for g, c in a.terms.items():
        x, y = g[:k], g[k:]
        layers.setdefault(y, {})
        layers[y][x] = layers[y].get(x, 0) + c
    return ChartElement(chart, M, {y: chart.rational(Poly(k, d)) for y, d in layers.items()})


def to_ncpoly(w: ChartElement) -> NCPoly:
    """Back to S_q when every coefficient is a polynomial."""
    alg = w.alg
    terms = {}
    for a, r in w.layers.items():
        if not r.is_polynomial():
            raise ChartError("element has non-polynomial coefficients")
        for x, c in r.num.terms.items():
            terms[x + a] = c
    return NCPoly(alg, terms)


# product ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bidiff_table(alg: EnvelopingAlgebra, alpha: Exp, beta: Exp, budget: int):
    """Entries (sigma, rho, gamma, K) with |sigma|+|rho| <= budget."""
    k = alg.n_plus_1
    ya = (0,) * k + alpha
    yb = (0,) * k + beta
    out = []
    for total in range(budget + 1):
        for s_len in range(total + 1):
            for sigma in monomials_of_degree(k, s_len):
                for rho in monomials_of_degree(k, total - s_len):
                    left = sigma + alpha
                    right = rho + beta
                    fac = exp_factorial(sigma) * exp_factorial(rho)
                    for g, c in alg.mono_mul(left, right).items():
                        if any(g[:k]):
                            continue
                        out.append((sigma, rho, g[k:], c / fac))
    return tuple(out)


def chart_multiply(a: ChartElement, b: ChartElement) -> ChartElement:
    a._check(b)
    alg = a.alg
    M = a.M
    out: Dict[Exp, RationalFn] = {}
    da: Dict[Tuple[Exp, Exp], RationalFn] = {}
    db: Dict[Tuple[Exp, Exp], RationalFn] = {}
    for alpha, r in a.layers.items():
        wa = _rad_weight(alg, alpha)
        for beta, s in b.layers.items():
            budget = M - 1 - wa - _rad_weight(alg, beta)
            if budget < 0:
                continue
            for sigma, rho, gamma, K in _bidiff_table(alg, alpha, beta, budget):
                key_a = (alpha, sigma)
                ra = da.get(key_a)
                if ra is None:
                    ra = da[key_a] = r.diff_multi(sigma)
                if not ra:
                    continue
                key_b = (beta, rho)
                sb = db.get(key_b)
                if sb is None:
                    sb = db[key_b] = s.diff_multi(rho)
                if not sb:
                    continue
                term = ra * sb * K
                out[gamma] = out[gamma] + term if gamma in out else term
    return ChartElement(a.chart, M, out)


def chart_commutator(a: ChartElement, b: ChartElement) -> ChartElement:
    return chart_multiply(a, b) - chart_multiply(b, a)


# operators -------------------------------------------------------------------

def generator(chart: Chart, M: int, j: int) -> ChartElement:
    """The chart element z_j."""
    alg = chart.alg
    k = alg.n_plus_1
    ny = alg.nvars - k
    if j < k:
        return from_rational(chart, M, chart.rational(Poly.var(k, j)))
    a = [0] * ny
    a[j - k] = 1
    return from_rational(chart, M, chart.rational(Poly.constant(k, 1)), tuple(a))


def left_mult(chart: Chart, M: int, j: int) -> ChartOp:
    g = generator(chart, M, j)
    return lambda w: chart_multiply(g, w)


def right_mult(chart: Chart, M: int, j: int) -> ChartOp:
    g = generator(chart, M, j)
    return lambda w: chart_multiply(w, g)


def diag(r: RationalFn) -> ChartOp:
    return lambda w: w.coeff_mul(r)


def compose(*ops: ChartOp) -> ChartOp:
    """compose(A, B)(w) = A(B(w))."""
    def run(w):
        for op in reversed(ops):
            w = op(w)
        return w
    return run


def op_sum(terms: Sequence[Tuple[Fraction, ChartOp]]) -> ChartOp:
    def run(w):
        out = ChartElement(w.chart, w.M)
        for c, op in terms:
            if c:
                out = out + op(w).scale(c)
        return out
    return run


def invert_left_mult(chart: Chart, a: Poly, M: int) -> ChartOp:
    """Inverse of left multiplication by a, as a Neumann series in (1/a) Delta_a."""
    fe = chart.factor_exponents(a)
    if fe is None:
        raise ChartError("element is not a product of chart factors")
    c, exps = fe
    inv = chart.rational(Poly.constant(chart.alg.n_plus_1, 1 / c), exps)
    a_el = from_rational(chart, M, chart.rational(a))

    def delta(w):
        return chart_multiply(a_el, w) - w.coeff_mul(chart.rational(a))

    def run(w):
        term = w.coeff_mul(inv)
        total = term
        # each Delta_a raises radical filtration by at least one
        for _ in range(M):
            term = -delta(term).coeff_mul(inv)
            if not term:
                break
            total = total + term
        return total

    return run


def _x_inv(chart: Chart, i: int, power: int) -> RationalFn:
    if not chart.contains_standard(i):
        raise ChartError(f"chart does not lie inside U_{i}")
    k = chart.alg.n_plus_1
    exps = [0] * len(chart.factors)
    exps[chart.factors.index(Poly.var(k, i))] = power
    return chart.rational(Poly.constant(k, 1), exps)


def ad_x_op(chart: Chart, i: int, op: ChartOp) -> ChartOp:
    """[x_i, op] with x_i acting diagonally."""
    xi = chart.rational(Poly.var(chart.alg.n_plus_1, i))
    return lambda w: op(w).coeff_mul(xi) - op(w.coeff_mul(xi))


def build_chart_D(chart: Chart, M: int, i: int, l: int) -> ChartOp:
    """ad(x_i)^l of left multiplication by x_i."""
    op = left_mult(chart, M, i)
    for _ in range(l):
        op = ad_x_op(chart, i, op)
    return op


def build_T(chart: Chart, i: int, l: int, M: int) -> ChartOp:
    """(1/x_i^{l+1}) ad(x_i)^l(L_i); degree preserving."""
    if not 0 <= l < chart.alg.q:
        raise IndexError("l out of range")
    inv = _x_inv(chart, i, l + 1)
    return compose(diag(inv), build_chart_D(chart, M, i, l))


def build_S(chart: Chart, i: int, l: int, M: int) -> ChartOp:
    """(1/x_i^l) L_i^l."""
    inv = _x_inv(chart, i, l) if l else None
    L = left_mult(chart, M, i)

    def run(w):
        for _ in range(l):
            w = L(w)
        return w.coeff_mul(inv) if inv is not None else w
    return run


def build_V(chart: Chart, i: int, l: int, M: int) -> ChartOp:
    terms = [(Fraction((-1) ** (t + 1) * comb(l, t)), build_T(chart, i, t, M))
             for t in range(1, l + 1) if t < chart.alg.q]
    return op_sum(terms)


def build_Gamma(chart: Chart, i: int, M: int) -> ChartOp:
    q = chart.alg.q
    if q < 2:
        raise ValueError("Gamma needs q >= 2")
    terms = [(Fraction((-1) ** t * comb(q - 2, t)), build_T(chart, i, t, M))
             for t in range(q - 1)]
    return op_sum(terms)


@dataclass
class RecurrenceReport:
    i: int
    l: int
    M: int
    samples: int
    passed: bool
    witness: Optional[str] = None

    def as_dict(self):
        return {"i": self.i, "l": self.l, "M": self.M, "samples": self.samples,
                "passed": self.passed, "witness": self.witness}


def verify_sv_recurrence(chart: Chart, i: int, l: int, M: int,
                         samples: Iterable[ChartElement]) -> RecurrenceReport:
    """S_l = S_1 S_{l-1} - V_{l-1} S_{l-1} on each sample."""
    if l < 1:
        raise ValueError("l >= 1 required")
    S_l = build_S(chart, i, l, M)
    S_1 = build_S(chart, i, 1, M)
    S_prev = build_S(chart, i, l - 1, M)
    V_prev = build_V(chart, i, l - 1, M)
    count = 0
    for w in samples:
        count += 1
        prev = S_prev(w)
        lhs = S_l(w)
        rhs = S_1(prev) - V_prev(prev)
        if lhs != rhs:
            return RecurrenceReport(i, l, M, count, False, f"sample {w}: residual {lhs - rhs}")
    return RecurrenceReport(i, l, M, count, True)


def peel_left_fractions(w: ChartElement, p: Optional[int] = None) -> List[Tuple[int, NCPoly]]:
    """Write w as a finite sum of h^{-p} * a (a in S_q) modulo the truncation.

    Each step takes the lowest radical layer, clears denominators to a common
    power p of h, and subtracts h^{-p} * a for the resulting polynomial a.
    """
    chart = w.chart
    alg = chart.alg
    k = alg.n_plus_1
    h = chart.h()
    inv_h = invert_left_mult(chart, h, w.M)
    out: List[Tuple[int, NCPoly]] = []
    rest = w
    for _ in range(w.M + 1):
        if not rest:
            return out
        m = rest.filtration_level()
        low = rest.layer_part(m)
        need = max(max(r.den) for r in low.layers.values())
        pp = need if p is None else max(p, need)
        terms = {}
        for a, r in low.layers.items():
            num = r._lift((pp,) * len(chart.factors))
            for x, c in num.terms.items():
                terms[x + a] = c
        a_el = NCPoly(alg, terms)
        image = from_ncpoly(chart, w.M, a_el)
        for _ in range(pp):
            image = inv_h(image)
        out.append((pp, a_el))
        rest = rest - image
    if rest:
        raise ChartError("peeling did not terminate within the truncation")
    return out
