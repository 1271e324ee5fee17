"""PBW normal-form arithmetic in the enveloping algebra S_q of g_q(x).

An element is a sparse map from ordered exponent tuples (one entry per
Hall basis element z_0..z_v) to rationals.  Products are straightened by
moving each right factor z_j leftwards past larger letters using
z_k z_j = z_j z_k + [z_k, z_j].
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .hall_lie import AlgebraSignature, HallBasis, LieElement, build_hall_basis
from .poly import Exp, Poly, add_exp, exp_factorial, multi_indices_upto, render_terms

Terms = Dict[Exp, Fraction]


class EnvelopingAlgebra:
    """S_q for a fixed Hall basis, with memoized straightening."""

    def __init__(self, basis: HallBasis):
        self.basis = basis
        self.nvars = basis.size
        self.n_plus_1 = basis.n_generators
        self.q = basis.sig.q
        self.weights = basis.degrees
        self._gen_cache: Dict[Tuple[Exp, int], Terms] = {}
        self._mono_cache: Dict[Tuple[Exp, Exp], Terms] = {}
        self._lock = threading.Lock()

    def __eq__(self, other):
        return isinstance(other, EnvelopingAlgebra) and other.basis == self.basis

    def __hash__(self):
        return hash(self.basis)

    # multi-index helpers ----------------------------------------------------
    def unit(self, j: int) -> Exp:
        e = [0] * self.nvars
        e[j] = 1
        return tuple(e)

    def one_exp(self) -> Exp:
        return (0,) * self.nvars

    def weighted_degree(self, gamma: Exp) -> int:
        return sum(g * w for g, w in zip(gamma, self.weights))

    def x_part(self, gamma: Exp) -> Exp:
        return gamma[: self.n_plus_1]

    def y_part(self, gamma: Exp) -> Exp:
        return gamma[self.n_plus_1:]

    def radical_weight(self, gamma: Exp) -> int:
        return sum(g * w for g, w in zip(gamma[self.n_plus_1:], self.weights[self.n_plus_1:]))

    def x_degree(self, gamma: Exp) -> int:
        return sum(gamma[: self.n_plus_1])

    def labels(self) -> List[str]:
        return [self.basis.label(i) for i in range(self.nvars)]

    # straightening ----------------------------------------------------------
    def times_gen(self, gamma: Exp, j: int) -> Terms:
        """Normal form of z^gamma * z_j."""
        key = (gamma, j)
        hit = self._gen_cache.get(key)
        if hit is not None:
            return hit
        k = max((i for i, g in enumerate(gamma) if g), default=-1)
        if k <= j:
            g = list(gamma)
            g[j] += 1
            result = {tuple(g): Fraction(1)}
        else:
            g = list(gamma)
            g[k] -= 1
            rest = tuple(g)
            result: Terms = {}
            # z^rest z_k z_j = (z^rest z_j) z_k + z^rest [z_k, z_j]
            for mono, c in self.times_gen(rest, j).items():
                for m2, c2 in self.times_gen(mono, k).items():
                    result[m2] = result.get(m2, 0) + c * c2
            for l, cl in self.basis.bracket_basis(k, j).items():
                for m2, c2 in self.times_gen(rest, l).items():
                    result[m2] = result.get(m2, 0) + cl * c2
            result = {m: c for m, c in result.items() if c}
        with self._lock:
            self._gen_cache[key] = result
        return result

    def mono_mul(self, a: Exp, b: Exp) -> Terms:
        """Normal form of z^a * z^b."""
        key = (a, b)
        hit = self._mono_cache.get(key)
        if hit is not None:
            return hit
        cur: Terms = {a: Fraction(1)}
        for j, k in enumerate(b):
            for _ in range(k):
                nxt: Terms = {}
                for mono, c in cur.items():
                    for m2, c2 in self.times_gen(mono, j).items():
                        nxt[m2] = nxt.get(m2, 0) + c * c2
                cur = {m: c for m, c in nxt.items() if c}
        with self._lock:
            self._mono_cache[key] = cur
        return cur

    # constructors -----------------------------------------------------------
    def zero(self) -> "NCPoly":
        return NCPoly(self, {})

    def one(self) -> "NCPoly":
        return NCPoly(self, {self.one_exp(): Fraction(1)})

    def scalar(self, c) -> "NCPoly":
        return NCPoly(self, {self.one_exp(): Fraction(c)})

    def gen(self, j: int) -> "NCPoly":
        return NCPoly(self, {self.unit(j): Fraction(1)})

    def monomial(self, gamma: Exp, c=1) -> "NCPoly":
        return NCPoly(self, {tuple(gamma): Fraction(c)})

    def from_lie(self, el: LieElement) -> "NCPoly":
        if el.basis != self.basis:
            raise ValueError("basis mismatch")
        return NCPoly(self, {self.unit(i): c for i, c in el.terms})

    def ordered(self, p: Poly) -> "NCPoly":
        """Ordered functional calculus on a commutative polynomial in all z."""
        if p.nvars == self.n_plus_1:
            pad = (0,) * (self.nvars - self.n_plus_1)
            return NCPoly(self, {e + pad: c for e, c in p.terms.items()})
        if p.nvars != self.nvars:
            raise ValueError("polynomial variable count does not match the algebra")
        return NCPoly(self, dict(p.terms))


@lru_cache(maxsize=None)
def algebra(n_plus_1: int, q: int) -> EnvelopingAlgebra:
    return EnvelopingAlgebra(build_hall_basis(AlgebraSignature(n_plus_1, q)))


class NCPoly:
    """Element of S_q in PBW normal form."""

    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg: EnvelopingAlgebra, terms: Optional[Terms] = None):
        self.alg = alg
        self.terms: Terms = {tuple(e): Fraction(c) for e, c in (terms or {}).items() if c}
        self._hash = None

    def _check(self, other: "NCPoly"):
        if not isinstance(other, NCPoly) or other.alg != self.alg:
            raise ValueError("basis mismatch")

    def _coerce(self, other) -> "NCPoly":
        if isinstance(other, NCPoly):
            self._check(other)
            return other
        return self.alg.scalar(other)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        other = self._coerce(other)
        d = dict(self.terms)
        for e, c in other.terms.items():
            d[e] = d.get(e, 0) + c
        return NCPoly(self.alg, d)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly(self.alg, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "NCPoly":
        c = Fraction(c)
        return NCPoly(self.alg, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, NCPoly):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = self.alg.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, NCPoly):
            return self.alg == other.alg and self.terms == other.terms
        try:
            return self == self.alg.scalar(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def as_poly(self) -> Poly:
        """The same coefficients read as a commutative polynomial in all z."""
        return Poly(self.alg.nvars, self.terms)

    def sorted_terms(self):
        alg = self.alg
        return sorted(self.terms.items(),
                      key=lambda t: (alg.weighted_degree(t[0]), tuple(-k for k in t[0])))

    def __str__(self):
        return render(self)

    __repr__ = __str__


def render_monomial(alg: EnvelopingAlgebra, gamma: Exp) -> str:
    parts = []
    for i, k in enumerate(gamma):
        if k:
            name = alg.basis.label(i)
            parts.append(name if k == 1 else f"{name}^{k}")
    return "*".join(parts)


def render(a: NCPoly) -> str:
    """Canonical text: terms by (weighted degree, lex multi-index), exact coefficients."""
    return render_terms(a.sorted_terms(), lambda e: render_monomial(a.alg, e))


# core operations ------------------------------------------------------------

def multiply(a: NCPoly, b: NCPoly) -> NCPoly:
    a._check(b)
    if not a.terms or not b.terms:
        return a.alg.zero()
    out: Terms = {}
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            for e, c in a.alg.mono_mul(ea, eb).items():
                out[e] = out.get(e, 0) + ca * cb * c
    return NCPoly(a.alg, out)


def commutator(a: NCPoly, b: NCPoly) -> NCPoly:
    return multiply(a, b) - multiply(b, a)


def tau(alg: EnvelopingAlgebra, p: Poly) -> NCPoly:
    """Ordered monomial x^beta for each commutative x^beta."""
    if p.nvars != alg.n_plus_1:
        raise ValueError(f"expected a polynomial in {alg.n_plus_1} variables, got {p.nvars}")
    return alg.ordered(p)


def epsilon(a: NCPoly) -> Poly:
    """Coefficient layer free of radical variables."""
    alg = a.alg
    k = alg.n_plus_1
    return Poly(k, {e[:k]: c for e, c in a.terms.items() if not any(e[k:])})


def diagonal_mul(j: int, a: NCPoly) -> NCPoly:
    """z_j * a computed in the commutative model of PBW coefficients."""
    u = a.alg.unit(j)
    return NCPoly(a.alg, {add_exp(e, u): c for e, c in a.terms.items()})


def graded_component(a: NCPoly, d: int) -> NCPoly:
    alg = a.alg
    return NCPoly(alg, {e: c for e, c in a.terms.items() if alg.weighted_degree(e) == d})


def layer_component(a: NCPoly, e: int, m: int) -> NCPoly:
    """Projection to S^e (x-degree e) tensor R^m (radical weight m)."""
    alg = a.alg
    return NCPoly(alg, {g: c for g, c in a.terms.items()
                        if alg.x_degree(g) == e and alg.radical_weight(g) == m})


def homogeneous_degree(a: NCPoly) -> Optional[int]:
    degs = {a.alg.weighted_degree(e) for e in a.terms}
    return degs.pop() if len(degs) == 1 else None


def layers(a: NCPoly) -> Dict[Tuple[int, int], NCPoly]:
    out: Dict[Tuple[int, int], Terms] = {}
    alg = a.alg
    for g, c in a.terms.items():
        out.setdefault((alg.x_degree(g), alg.radical_weight(g)), {})[g] = c
    return {k: NCPoly(alg, v) for k, v in sorted(out.items())}


def filtration_level(a: NCPoly) -> Optional[int]:
    """Minimal radical weight over the terms; None for zero."""
    return min((a.alg.radical_weight(e) for e in a.terms), default=None)


# commutation formulae -------------------------------------------------------

def ad(j: int, a: NCPoly) -> NCPoly:
    z = a.alg.gen(j)
    return multiply(z, a) - multiply(a, z)


def ad_multi(i: Exp, a: NCPoly, innermost_last: bool = True) -> NCPoly:
    """ad(z_0)^{i_0} ... ad(z_v)^{i_v}(a), z_v innermost; reversed order otherwise."""
    order = range(len(i) - 1, -1, -1) if innermost_last else range(len(i))
    out = a
    for t in order:
        for _ in range(i[t]):
            out = ad(t, out)
            if not out:
                return out
    return out


def commutator_expand(a: NCPoly, p: Poly, form: str = "left") -> NCPoly:
    """[a, tau(p)] through iterated adjoints and scaled derivatives of p.

    left:  sum_{|i|>0} ad(z)^i(a) * (d^i p)(z),      d^i  = -(1/i!) partial^i
    right: sum_{|i|>0} (dbar^i p)(z) * ad(zbar)^i(a), dbar^i = ((-1)^|i|/i!) partial^i
    """
    alg = a.alg
    if p.nvars == alg.n_plus_1:
        p = Poly(alg.nvars, {e + (0,) * (alg.nvars - alg.n_plus_1): c for e, c in p.terms.items()})
    bound = [max((e[t] for e in p.terms), default=0) for t in range(alg.nvars)]
    out = alg.zero()
    for i in multi_indices_upto(alg.nvars, bound):
        if not any(i):
            continue
        dp = p.diff_multi(i)
        if not dp:
            continue
        if form == "left":
            adi = ad_multi(i, a, innermost_last=True)
            if adi:
                out = out + multiply(adi, alg.ordered(dp)).scale(Fraction(-1, exp_factorial(i)))
        elif form == "right":
            adi = ad_multi(i, a, innermost_last=False)
            if adi:
                sign = -1 if sum(i) % 2 else 1
                out = out + multiply(alg.ordered(dp), adi).scale(Fraction(sign, exp_factorial(i)))
        else:
            raise ValueError("form must be 'left' or 'right'")
    return out


def layer_dimension(alg: EnvelopingAlgebra, e: int, m: int) -> int:
    """Number of PBW monomials with x-degree e and radical weight m."""
    from .poly import binomial, weighted_monomials
    ys = weighted_monomials(alg.weights[alg.n_plus_1:], m)
    return binomial(e + alg.n_plus_1 - 1, e) * len(ys)


def radical_monomials(alg: EnvelopingAlgebra, m: int) -> List[Exp]:
    from .poly import weighted_monomials
    return weighted_monomials(alg.weights[alg.n_plus_1:], m)


def star_product_q2(alg: EnvelopingAlgebra, f: Poly, g: Poly) -> NCPoly:
    """tau(f) tau(g) for q = 2 through the closed bidifferential formula

        sum_a (-1)^|a| / a!  (prod d_j^a_ij f)(prod d_i^a_ij g)  prod y_ij^a_ij

    over exponent vectors a indexed by the pairs i < j.
    """
    from .poly import monomials_of_degree
    if alg.q != 2:
        raise ValueError("the closed product formula is for q = 2")
    k = alg.n_plus_1
    if f.nvars != k or g.nvars != k:
        raise ValueError(f"expected polynomials in {k} variables")
    pairs = []
    for t in range(alg.nvars - k):
        el = alg.basis.elements[k + t]
        pairs.append((el.word[0], el.word[1]))
    out: Dict[Exp, Fraction] = {}
    if not f or not g:
        return NCPoly(alg)
    for total in range(min(f.degree(), g.degree()) + 1):
        for a in monomials_of_degree(len(pairs), total):
            df = [0] * k
            dg = [0] * k
            for (i, j), ai in zip(pairs, a):
                df[j] += ai
                dg[i] += ai
            prod = f.diff_multi(tuple(df)) * g.diff_multi(tuple(dg))
            if not prod:
                continue
            c0 = Fraction((-1) ** total, exp_factorial(a))
            for e, c in prod.terms.items():
                key = e + tuple(a)
                out[key] = out.get(key, 0) + c0 * c
    return NCPoly(alg, out)
