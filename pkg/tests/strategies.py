"""Hypothesis strategies shared by the module tests."""

from hypothesis import strategies as st

from ncproj.hall_lie import AlgebraSignature, LieElement, build_hall_basis
from ncproj.nc_algebra import NCPoly, algebra
from ncproj.poly import Poly, monomials_of_degree, weighted_monomials

SIGNATURES = [(n, q) for n in (1, 2, 3) for q in (2, 3, 4)]
SMALL_SIGNATURES = [(1, 2), (1, 3), (2, 2), (2, 3)]

coeffs = st.integers(-5, 5).filter(bool)


def polys(nvars, max_deg=3, max_terms=4):
    mons = [e for d in range(max_deg + 1) for e in monomials_of_degree(nvars, d)]
    return st.dictionaries(st.sampled_from(mons), coeffs, max_size=max_terms).map(lambda t: Poly(nvars, t))


def forms(nvars, degree, max_terms=4):
    mons = monomials_of_degree(nvars, degree)
    return st.dictionaries(st.sampled_from(mons), coeffs, min_size=1, max_size=max_terms).map(
        lambda t: Poly(nvars, t))


def nc_elements(alg, max_deg=3, max_terms=3):
    mons = [e for d in range(max_deg + 1) for e in weighted_monomials(alg.weights, d)]
    return st.dictionaries(st.sampled_from(mons), coeffs, max_size=max_terms).map(lambda t: NCPoly(alg, t))


def lie_elements(basis, max_terms=3):
    return st.dictionaries(st.integers(0, basis.size - 1), coeffs, max_size=max_terms).map(
        lambda t: LieElement.from_dict(basis, t))


@st.composite
def algebra_and(draw, make, signatures=SIGNATURES, count=1):
    n, q = draw(st.sampled_from(signatures))
    alg = algebra(n + 1, q)
    items = [draw(make(alg)) for _ in range(count)]
    return (alg, *items)


@st.composite
def basis_and(draw, count=3, signatures=SIGNATURES):
    n, q = draw(st.sampled_from(signatures))
    basis = build_hall_basis(AlgebraSignature(n + 1, q))
    return (basis, *[draw(lie_elements(basis)) for _ in range(count)])
