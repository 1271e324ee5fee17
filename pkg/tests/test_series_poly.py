from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from ncproj.poly import Poly, binomial
from ncproj.series import PowerSeries, SeriesError, geometric_derivative_series, series_from_expr

from strategies import polys

P3 = polys(3, 3)


@given(P3, P3, P3)
def test_poly_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == Poly(3)


@given(P3, P3)
def test_leibniz_rule(a, b):
    for i in range(3):
        assert (a * b).diff(i) == a.diff(i) * b + a * b.diff(i)


@given(P3, P3)
def test_exact_division(a, b):
    if b:
        assert (a * b).divide_exact(b) == a


def test_binomial_edge_cases():
    assert binomial(5, 2) == 10
    assert binomial(2, 5) == 0
    assert binomial(-1, 2) == 0


def series_in_two(order=6):
    coeff = st.integers(-4, 4)
    exps = [(i, j) for i in range(4) for j in range(3)]
    return st.dictionaries(st.sampled_from(exps), coeff, max_size=5).map(
        lambda d: PowerSeries(["s", "t"], [1, 2], order, d))


@given(series_in_two(), series_in_two(), series_in_two())
def test_series_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(series_in_two())
def test_series_inverse(a):
    a = a + (1 - a.constant_term()) if a.constant_term() == 0 else a
    assert a * a.inverse() == a.constant(1)


def test_non_invertible():
    s = PowerSeries(["t"], [1], 4)
    with pytest.raises(SeriesError):
        s.var("t").inverse()


@pytest.mark.parametrize("k", range(5))
def test_geometric_derivative_coefficients(k):
    base = PowerSeries(["t"], [1], 10)
    g = geometric_derivative_series(base, "t", k)
    assert [g.coefficient((m,)) for m in range(11)] == [comb(m + k, k) for m in range(11)]
    assert g == (1 - base.var("t")) ** -(k + 1)


def test_series_from_expression():
    s = series_from_expr("1/(1 - t1) + 2*t2", ["t1", "t2"], [1, 2], 4)
    assert s.weight_totals() == [1, 1, 3, 1, 1]
    assert s.coefficient((0, 1)) == 2
    with pytest.raises(SeriesError):
        series_from_expr("[t1, t2]", ["t1", "t2"], [1, 2], 4)
    with pytest.raises(SeriesError):
        series_from_expr("u", ["t"], [1], 4)


def test_weighted_truncation():
    s = series_from_expr("1/(1 - t2)", ["t2"], [2], 5)
    assert s.coeffs == {(0,): 1, (1,): 1, (2,): 1}
    assert str(s) == "1 + t2 + t2^2 + O(6)"
