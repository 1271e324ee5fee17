"""Truncated multivariate formal power series with exact rational coefficients.

Each variable carries a positive weight; a series keeps only the terms of
weighted degree at most `order`, so every operation is exact up to that order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .parsing import Parsed, _scalar_of, parse
from .poly import Exp, add_exp, render_terms, monomial_str


class SeriesError(ValueError):
    pass


class PowerSeries:
    __slots__ = ("names", "weights", "order", "coeffs")

    def __init__(self, names: Sequence[str], weights: Sequence[int], order: int,
                 coeffs: Optional[Dict[Exp, Fraction]] = None):
        if len(names) != len(weights):
            raise SeriesError("one weight per variable")
        if any(w <= 0 for w in weights):
            raise SeriesError("variable weights must be positive")
        self.names = tuple(names)
        self.weights = tuple(weights)
        self.order = order
        out = {}
        for e, c in (coeffs or {}).items():
            c = Fraction(c)
            if c and self.weight_of(e) <= order:
                out[tuple(e)] = c
        self.coeffs = out

    # construction -----------------------------------------------------------

    def weight_of(self, e: Exp) -> int:
        return sum(k * w for k, w in zip(e, self.weights))

    def _like(self, coeffs) -> "PowerSeries":
        return PowerSeries(self.names, self.weights, self.order, coeffs)

    def constant(self, c) -> "PowerSeries":
        return self._like({(0,) * len(self.names): Fraction(c)})

    def var(self, name: str) -> "PowerSeries":
        if name not in self.names:
            raise SeriesError(f"unknown series variable '{name}'")
        i = self.names.index(name)
        e = tuple(1 if k == i else 0 for k in range(len(self.names)))
        return self._like({e: Fraction(1)})

    @classmethod
    def zero(cls, names, weights, order) -> "PowerSeries":
        return cls(names, weights, order)

    # arithmetic ----------------------------------------------------------------

    def _coerce(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            if other.names != self.names or other.weights != self.weights:
                raise SeriesError("series over different variables")
            if other.order != self.order:
                raise SeriesError("series truncated at different orders")
            return other
        return self.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        d = dict(self.coeffs)
        for e, c in other.coeffs.items():
            d[e] = d.get(e, 0) + c
        return self._like(d)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        d: Dict[Exp, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            w1 = self.weight_of(e1)
            for e2, c2 in other.coeffs.items():
                if w1 + self.weight_of(e2) > self.order:
                    continue
                e = add_exp(e1, e2)
                d[e] = d.get(e, 0) + c1 * c2
        return self._like(d)

    __rmul__ = __mul__

    def constant_term(self) -> Fraction:
        return self.coeffs.get((0,) * len(self.names), Fraction(0))

    def inverse(self) -> "PowerSeries":
        c = self.constant_term()
        if not c:
            raise SeriesError("series without constant term is not invertible")
        # 1/(c(1 - u)) = c^-1 * sum u^k; u has no constant term, so order+1 steps suffice
        u = 1 - self * (1 / c)
        out = self.constant(1)
        power = self.constant(1)
        for _ in range(self.order):
            power = power * u
            if not power.coeffs:
                break
            out = out + power
        return out * (1 / c)

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, name: str, k: int = 1) -> "PowerSeries":
        """k-th partial derivative; the order drops by k * weight."""
        i = self.names.index(name)
        d = {}
        for e, c in self.coeffs.items():
            if e[i] < k:
                continue
            f = 1
            for t in range(k):
                f *= e[i] - t
            ne = tuple(v - k if j == i else v for j, v in enumerate(e))
            d[ne] = c * f
        return PowerSeries(self.names, self.weights, self.order - k * self.weights[i], d)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.names, self.weights, min(order, self.order), self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return (self.names == other.names and self.weights == other.weights
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.names, self.order, frozenset(self.coeffs.items())))

    # inspection ------------------------------------------------------------------

    def coefficient(self, e: Exp) -> Fraction:
        return self.coeffs.get(tuple(e), Fraction(0))

    def by_weight(self) -> Dict[int, Dict[Exp, Fraction]]:
        out: Dict[int, Dict[Exp, Fraction]] = {}
        for e, c in self.coeffs.items():
            out.setdefault(self.weight_of(e), {})[e] = c
        return out

    def weight_totals(self) -> List[Fraction]:
        """Sum of the coefficients in each weighted degree 0..order."""
        out = [Fraction(0)] * (self.order + 1)
        for e, c in self.coeffs.items():
            out[self.weight_of(e)] += c
        return out

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs.values())

    def to_str(self) -> str:
        items = sorted(self.coeffs.items(), key=lambda t: (self.weight_of(t[0]), tuple(-k for k in t[0])))
        return render_terms(items, lambda e: monomial_str(e, self.names))

    def __str__(self):
        return self.to_str() + f" + O({self.order + 1})"

    __repr__ = __str__


def series_from_expr(text: str, names: Sequence[str], weights: Sequence[int], order: int) -> PowerSeries:
    """Expand an expression in the series variables (+, -, *, /, ^) to the given order."""
    node = parse(text).ast if not isinstance(text, Parsed) else text.ast
    zero = PowerSeries(names, weights, order)

    def ev(n):
        s = _scalar_of(n)
        if s is not None:
            return zero.constant(s)
        tag = n[0]
        if tag == "name":
            return zero.var(n[1])
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "mul":
            return ev(n[1]) * ev(n[2])
        if tag == "div":
            return ev(n[1]) / ev(n[2])
        if tag == "pow":
            return ev(n[1]) ** n[2]
        raise SeriesError(f"operation '{tag}' is not allowed in a series expression")

    return ev(node)


def geometric_derivative_series(base: PowerSeries, name: str, k: int) -> PowerSeries:
    """(1/k!) d^k/dt^k (1 - t)^-1 computed by differentiation at a raised order."""
    i = base.names.index(name)
    w = base.weights[i]
    lifted = PowerSeries(base.names, base.weights, base.order + k * w)
    g = (1 - lifted.var(name)).inverse().diff(name, k)
    fact = 1
    for t in range(2, k + 1):
        fact *= t
    return g.truncate(base.order) * Fraction(1, fact)
