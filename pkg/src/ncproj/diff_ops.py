"""Differential operators on S_q built from iterated adjoints.

A DiffOp is a finite sum of terms  scalar * M(C) o partial^beta  where
partial^beta differentiates the PBW coefficients as a commutative
polynomial in z, and M(C) multiplies by the enveloping-algebra element C
on the right (side "R") or on the left (side "L").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, Iterable, List, Optional, Tuple

from .hall_lie import LieElement, bracket
from .nc_algebra import EnvelopingAlgebra, NCPoly, diagonal_mul, multiply
from .poly import Exp, exp_factorial, monomials_of_degree

Term = Tuple[NCPoly, Exp, Fraction, str]


@dataclass(frozen=True)
class DiffOp:
    alg: EnvelopingAlgebra
    terms: Tuple[Term, ...] = ()
    name: str = ""
    shift: Optional[int] = None

    @staticmethod
    def build(alg, terms: Iterable[Term], name="", shift=None) -> "DiffOp":
        merged: Dict[Tuple[Exp, str], Dict] = {}
        for coeff, beta, scalar, side in terms:
            if not coeff or not scalar:
                continue
            key = (tuple(beta), side)
            acc = merged.get(key)
            merged[key] = coeff.scale(scalar) if acc is None else acc + coeff.scale(scalar)
        out = []
        for (beta, side), c in merged.items():
            if c:
                out.append((c, beta, Fraction(1), side))
        out.sort(key=lambda t: (t[3], sum(t[1]), tuple(-k for k in t[1]), str(t[0])))
        return DiffOp(alg, tuple(out), name, shift)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DiffOp") -> "DiffOp":
        return DiffOp.build(self.alg, self.terms + other.terms, self.name, self.shift)

    def __neg__(self):
        return DiffOp.build(self.alg, [(c, b, -s, side) for c, b, s, side in self.terms],
                            self.name, self.shift)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "DiffOp":
        return DiffOp.build(self.alg, [(c, b, s * Fraction(k), side) for c, b, s, side in self.terms],
                            self.name, self.shift)

    def __call__(self, a: NCPoly) -> NCPoly:
        return apply(self, a)

    def __str__(self):
        return render(self)


def _dbar_scalar(beta: Exp) -> Fraction:
    return Fraction(-1 if sum(beta) % 2 else 1, exp_factorial(beta))


def _ad_bar(basis, i: Exp, j: int) -> LieElement:
    """ad(z_v)^{i_v} ... ad(z_0)^{i_0}(z_j), z_0 applied first."""
    out = LieElement.generator(basis, j)
    for t in range(len(i)):
        g = LieElement.generator(basis, t)
        for _ in range(i[t]):
            out = bracket(g, out)
            if out.is_zero():
                return out
    return out


def _ad_plain(basis, i: Exp, j: int) -> LieElement:
    """ad(z_0)^{i_0} ... ad(z_v)^{i_v}(z_j), z_v applied first."""
    out = LieElement.generator(basis, j)
    for t in range(len(i) - 1, -1, -1):
        g = LieElement.generator(basis, t)
        for _ in range(i[t]):
            out = bracket(g, out)
            if out.is_zero():
                return out
    return out


def _check_index(alg, j, upper=None):
    upper = alg.nvars if upper is None else upper
    if not 0 <= j < upper:
        raise IndexError(f"index {j} out of range 0..{upper - 1}")


def _indices(alg: EnvelopingAlgebra, budget: int):
    """Multi-indices i over all z with weighted degree in 1..budget."""
    w = alg.weights
    nz = alg.nvars

    def rec(t, left, acc):
        if t == nz:
            if any(acc):
                yield tuple(acc)
            return
        for k in range(left // w[t] + 1):
            acc.append(k)
            yield from rec(t + 1, left - k * w[t], acc)
            acc.pop()

    yield from rec(0, budget, [])


def _x_len(alg, i: Exp) -> int:
    return sum(i[: alg.n_plus_1])


def _bar_terms(alg, j: int, keep) -> List[Term]:
    basis = alg.basis
    budget = alg.q - alg.weights[j]
    out = []
    for i in _indices(alg, budget):
        if not keep(i):
            continue
        c = _ad_bar(basis, i, j)
        if c.is_zero():
            continue
        out.append((alg.from_lie(c), i, _dbar_scalar(i), "R"))
    return out


def build_delta_jk(alg: EnvelopingAlgebra, j: int, k: int) -> DiffOp:
    _check_index(alg, j)
    if not 0 <= k <= alg.q - alg.weights[j]:
        raise IndexError("k out of range")
    terms = _bar_terms(alg, j, lambda i: _x_len(alg, i) == k and any(i[: j + 1]))
    return DiffOp.build(alg, terms, f"Delta_{j},{k}", alg.weights[j])


def build_nabla_jk(alg: EnvelopingAlgebra, j: int, k: int) -> DiffOp:
    _check_index(alg, j)
    if not 0 <= k <= alg.q - alg.weights[j]:
        raise IndexError("k out of range")
    terms = _bar_terms(alg, j, lambda i: _x_len(alg, i) == k and not any(i[: j + 1]))
    return DiffOp.build(alg, terms, f"Nabla_{j},{k}", alg.weights[j]).scale(-1)


def build_delta(alg: EnvelopingAlgebra, j: int) -> DiffOp:
    _check_index(alg, j)
    op = DiffOp(alg, (), f"Delta_{j}", alg.weights[j])
    for k in range(alg.q - alg.weights[j] + 1):
        op = op + build_delta_jk(alg, j, k)
    return DiffOp(alg, op.terms, f"Delta_{j}", alg.weights[j])


def build_nabla(alg: EnvelopingAlgebra, j: int) -> DiffOp:
    _check_index(alg, j)
    op = DiffOp(alg, (), f"Nabla_{j}", alg.weights[j])
    for k in range(alg.q - alg.weights[j] + 1):
        op = op + build_nabla_jk(alg, j, k)
    return DiffOp(alg, op.terms, f"Nabla_{j}", alg.weights[j])


def build_nabla_prime(alg: EnvelopingAlgebra, j: int) -> DiffOp:
    """Right multiplication by z_j minus z_j, written with left coefficients."""
    _check_index(alg, j)
    basis = alg.basis
    terms = []
    for i in _indices(alg, alg.q - alg.weights[j]):
        if not any(i[j:]):
            continue
        c = _ad_plain(basis, i, j)
        if c.is_zero():
            continue
        terms.append((alg.from_lie(c), i, Fraction(1, exp_factorial(i)), "L"))
    return DiffOp.build(alg, terms, f"Nabla'_{j}", alg.weights[j])


def ad_x(op: DiffOp, i: int) -> DiffOp:
    """Operator commutator [x_i, op] with x_i acting diagonally."""
    alg = op.alg
    _check_index(alg, i, alg.n_plus_1)
    terms = []
    for c, beta, s, side in op.terms:
        if side != "R":
            raise ValueError("commutator with x_i is implemented for right-coefficient operators")
        if beta[i] == 0:
            continue
        nb = list(beta)
        nb[i] -= 1
        terms.append((c, tuple(nb), -s * beta[i], side))
    shift = None if op.shift is None else op.shift + 1
    return DiffOp.build(alg, terms, f"ad(x{i}){op.name}", shift)


def build_D(alg: EnvelopingAlgebra, i: int, l: int, method: str = "closed") -> DiffOp:
    """ad(x_i)^l applied to Delta_i."""
    _check_index(alg, i, alg.n_plus_1)
    if not 0 <= l < alg.q:
        raise IndexError("l out of range")
    name = f"D_{i},{l}"
    if method == "operator":
        op = build_delta(alg, i)
        for _ in range(l):
            op = ad_x(op, i)
        return DiffOp(alg, op.terms, name, l + 1)
    if method != "closed":
        raise ValueError("method must be 'closed' or 'operator'")
    if l == 0:
        return DiffOp(alg, build_delta(alg, i).terms, name, 1)
    basis = alg.basis
    terms = []
    for beta in _indices_with_zero(alg, alg.q - 1 - l):
        shifted = list(beta)
        shifted[i] += l
        shifted = tuple(shifted)
        if not any(shifted[: i + 1]):
            continue
        c = _ad_bar(basis, shifted, i)
        if c.is_zero():
            continue
        terms.append((alg.from_lie(c), beta, _dbar_scalar(beta), "R"))
    return DiffOp.build(alg, terms, name, l + 1)


def _indices_with_zero(alg, budget):
    yield (0,) * alg.nvars
    if budget > 0:
        yield from _indices(alg, budget)


# application -----------------------------------------------------------------

def apply(op: DiffOp, a: NCPoly) -> NCPoly:
    if a.alg != op.alg:
        raise ValueError("basis mismatch")
    alg = a.alg
    out = alg.zero()
    if not a.terms:
        return out
    p = a.as_poly()
    for c, beta, s, side in op.terms:
        dp = p.diff_multi(beta)
        if not dp:
            continue
        base = alg.ordered(dp)
        prod = multiply(base, c) if side == "R" else multiply(c, base)
        out = out + prod.scale(s)
    return out


def left_mult_op(a: NCPoly, j: int) -> NCPoly:
    """z_j * a via diagonal multiplication plus Delta_j."""
    return diagonal_mul(j, a) + apply(build_delta(a.alg, j), a)


def right_mult_op(a: NCPoly, j: int) -> NCPoly:
    return diagonal_mul(j, a) + apply(build_nabla(a.alg, j), a)


def spanning_monomials(alg: EnvelopingAlgebra, max_degree: int) -> List[NCPoly]:
    """All PBW monomials of weighted degree <= max_degree."""
    out = []
    for d in range(max_degree + 1):
        from .poly import weighted_monomials
        for e in weighted_monomials(alg.weights, d):
            out.append(alg.monomial(e))
    return out


def operators_equal(op1, op2, alg: EnvelopingAlgebra, degree_bound: Optional[int] = None):
    """Compare two operators (callables on NCPoly) on all monomials up to the bound.

    Returns (equal, first differing monomial or None, bound used).
    """
    bound = 2 * alg.q if degree_bound is None else degree_bound
    for m in spanning_monomials(alg, bound):
        if op1(m) != op2(m):
            return False, m, bound
    return True, None, bound


def render(op: DiffOp) -> str:
    alg = op.alg
    if not op.terms:
        return "0"
    parts = []
    for c, beta, s, side in op.terms:
        scaled = c.scale(s)
        der = "*".join(
            (f"d{alg.basis.label(t)}" if k == 1 else f"d{alg.basis.label(t)}^{k}")
            for t, k in enumerate(beta) if k
        ) or "1"
        tag = "R" if side == "R" else "L"
        parts.append(f"{tag}({scaled}) . {der}")
    return " + ".join(parts)


def render_dbar(op: DiffOp) -> str:
    """Text in terms of the scaled derivatives dbar^beta = ((-1)^|beta|/beta!) partial^beta."""
    alg = op.alg
    if not op.terms:
        return "0"
    parts = []
    for c, beta, s, side in op.terms:
        coeff = c.scale(s / _dbar_scalar(beta))
        der = "*".join(
            (f"dbar_{alg.basis.label(t)}" if k == 1 else f"dbar_{alg.basis.label(t)}^{k}")
            for t, k in enumerate(beta) if k
        ) or "1"
        parts.append(f"{'R' if side == 'R' else 'L'}({coeff}) . {der}")
    return " + ".join(parts)
