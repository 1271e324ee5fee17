"""Sparse commutative polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

Exp = Tuple[int, ...]


def add_exp(a: Exp, b: Exp) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


def sub_exp(a: Exp, b: Exp) -> Optional[Exp]:
    out = tuple(x - y for x, y in zip(a, b))
    return None if any(e < 0 for e in out) else out


def unit_exp(nvars: int, i: int, k: int = 1) -> Exp:
    e = [0] * nvars
    e[i] = k
    return tuple(e)


def exp_factorial(e: Exp) -> int:
    out = 1
    for k in e:
        out *= factorial(k)
    return out


def monomials_of_degree(nvars: int, degree: int) -> List[Exp]:
    """All exponent vectors with the given total degree, in descending lex order."""
    if degree < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


def weighted_monomials(weights: Sequence[int], total: int) -> List[Exp]:
    """Exponent vectors with sum(w_i * e_i) == total."""
    out: List[Exp] = []
    k = len(weights)

    def rec(i, remaining, acc):
        if i == k:
            if remaining == 0:
                out.append(tuple(acc))
            return
        w = weights[i]
        for e in range(remaining // w + 1):
            acc.append(e)
            rec(i + 1, remaining - e * w, acc)
            acc.pop()

    if total >= 0:
        rec(0, total, [])
    out.sort(reverse=True)
    return out


def multi_indices_upto(nvars: int, bound: Sequence[int]) -> Iterator[Exp]:
    """All exponent vectors e with 0 <= e_i <= bound[i]."""
    def rec(i, acc):
        if i == nvars:
            yield tuple(acc)
            return
        for e in range(bound[i] + 1):
            acc.append(e)
            yield from rec(i + 1, acc)
            acc.pop()
    yield from rec(0, [])


class Poly:
    """Immutable sparse polynomial in ``nvars`` commuting variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Dict[Exp, Fraction]] = None):
        self.nvars = nvars
        self.terms: Dict[Exp, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if c:
                    self.terms[tuple(e)] = Fraction(c)
        self._hash = None

    # constructors ----------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        return cls(nvars, {unit_exp(nvars, i): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Exp, c=1) -> "Poly":
        return cls(len(exp), {tuple(exp): Fraction(c)})

    # queries ----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def homogeneous_degree(self) -> Optional[int]:
        degs = {sum(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def leading(self) -> Tuple[Exp, Fraction]:
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    def variables(self) -> set:
        return {i for e in self.terms for i, k in enumerate(e) if k}

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        d = dict(self.terms)
        for e, c in other.terms.items():
            d[e] = d.get(e, 0) + c
        return Poly(self.nvars, d)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = Fraction(other)
            return Poly(self.nvars, {e: c * v for e, v in self.terms.items()}) if c else Poly(self.nvars)
        other = self._coerce(other)
        d: Dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = add_exp(e1, e2)
                d[e] = d.get(e, 0) + c1 * c2
        return Poly(self.nvars, d)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            return self == Poly.constant(self.nvars, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def diff(self, i: int, k: int = 1) -> "Poly":
        d: Dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            if e[i] >= k:
                f = 1
                for t in range(k):
                    f *= e[i] - t
                ne = list(e)
                ne[i] -= k
                d[tuple(ne)] = c * f
        return Poly(self.nvars, d)

    def diff_multi(self, alpha: Exp) -> "Poly":
        out = self
        for i, k in enumerate(alpha):
            if k:
                out = out.diff(i, k)
                if not out:
                    break
        return out

    def mul_monomial(self, exp: Exp, c=1) -> "Poly":
        c = Fraction(c)
        return Poly(self.nvars, {add_exp(e, exp): v * c for e, v in self.terms.items()})

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def substitute(self, values: Dict[int, "Poly"]) -> "Poly":
        """Replace variable i by values[i]; variables without a value stay (same ring only)."""
        target_n = next(iter(values.values())).nvars if values else self.nvars
        out = Poly(target_n)
        for e, c in self.terms.items():
            term = Poly.constant(target_n, c)
            for i, k in enumerate(e):
                if k:
                    v = values.get(i)
                    if v is None:
                        if target_n != self.nvars:
                            raise KeyError(f"no value for variable {i}")
                        v = Poly.var(target_n, i)
                    term = term * (v ** k)
            out = out + term
        return out

    def divide_exact(self, other: "Poly") -> Optional["Poly"]:
        """Exact quotient self/other, or None when other does not divide self."""
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        key = lambda t: (sum(t), t)
        lead_e = max(other.terms, key=key)
        lead_c = other.terms[lead_e]
        rem = dict(self.terms)
        quot: Dict[Exp, Fraction] = {}
        while rem:
            e = max(rem, key=key)
            shift = sub_exp(e, lead_e)
            if shift is None:
                return None
            c = rem[e] / lead_c
            quot[shift] = quot.get(shift, 0) + c
            for oe, oc in other.terms.items():
                ne = add_exp(oe, shift)
                v = rem.get(ne, 0) - c * oc
                if v:
                    rem[ne] = v
                else:
                    rem.pop(ne, None)
        return Poly(self.nvars, quot)

    def monic(self) -> "Poly":
        if not self:
            return self
        return self * (1 / self.leading()[1])

    # rendering --------------------------------------------------------------
    def sorted_terms(self) -> List[Tuple[Exp, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-k for k in t[0])))

    def to_str(self, names: Optional[Sequence[str]] = None) -> str:
        names = names or [f"x{i}" for i in range(self.nvars)]
        return render_terms(self.sorted_terms(), lambda e: monomial_str(e, names))

    def __str__(self):
        return self.to_str()

    __repr__ = __str__


def monomial_str(exp: Exp, names: Sequence[str]) -> str:
    parts = []
    for i, k in enumerate(exp):
        if k == 1:
            parts.append(names[i])
        elif k > 1:
            parts.append(f"{names[i]}^{k}")
    return "*".join(parts)


def render_terms(items, mono) -> str:
    """Join (key, coefficient) pairs into "a - 2*b + 1/3*c" style text."""
    if not items:
        return "0"
    out = []
    for key, c in items:
        m = mono(key)
        mag = abs(c)
        if not m:
            body = str(mag)
        elif mag == 1:
            body = m
        else:
            body = f"{mag}*{m}"
        sign = "-" if c < 0 else "+"
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def binomial(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n else 0
