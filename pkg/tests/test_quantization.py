from math import comb

import pytest

from ncproj.localization import Chart, ChartError, render
from ncproj.nc_algebra import algebra
from ncproj.poly import Poly, weighted_monomials
from ncproj.quantization import (QuotientReducer, build_quotients, classify, free_sheaf_series,
                                 layer_counts, lie_space_quotient, series_invariant)
from ncproj.series import series_from_expr
from ncproj.session import load_bundled

from strategies import SIGNATURES

X = [Poly.var(3, i) for i in range(3)]


def _labels(name, params, m_max=4):
    s = load_bundled(name, params)
    return {lay.m: sorted((c.name, c.cls.label()) for c in lay.nonzero_components())
            for lay in build_quotients(s.chain, m_max, 4, s.aliases())}


def test_two_lines_components():
    got = _labels("two_lines", {"d": 2})
    assert got[0] == [("1", "curve[2] Z(x0*x1 - x1*x2)")]
    assert got[2] == [("y1", "line Z(x1)"), ("y2", "point Z(x1, x0 - x2)"), ("y3", "point Z(x1, x0 - x2)")]
    assert got[4] == [("y1^2", "line Z(x1)")]


def test_saddle_and_parabola_components():
    saddle = _labels("saddle", {})
    assert len(saddle[2]) == 6 and len(saddle[4]) == 4
    assert ("y01", "points[2] Z(x0, x1, x2*x3)") in saddle[2]
    parabola = _labels("parabola", {})
    assert parabola[2] == [("y02", "point Z(x1, x2)"), ("y12", "point Z(x0, x2)")]
    assert parabola[4] == []


@pytest.mark.parametrize("gens,label", [
    ([X[0]], "line Z(x0)"),
    ([X[0], X[1]], "point Z(x0, x1)"),
    ([X[0] * X[1] - X[2] ** 2], "curve[2] Z(x0*x1 - x2^2)"),
    ([X[2], X[0] ** 2 - X[1] ** 2], "points[2] Z(x2, x0^2 - x1^2)"),
    ([Poly.constant(3, 1)], "empty"),
    ([], "P^2"),
])
def test_classify(gens, label):
    from ncproj.ideals_chains import _ideal_span
    hil = [comb(e + 2, 2) - _ideal_span(gens, 3, e).dim for e in range(6)]
    assert classify(gens, 3, hil).label() == label


def test_classify_rejects_wrong_hilbert_function():
    assert classify([X[0]], 3, [1, 2, 2]).kind == "unclassified"


@pytest.mark.parametrize("name,params", [("two_lines", {"d": 2}), ("two_lines", {"d": 3}), ("saddle", {}),
                                         ("parabola", {}), ("two_lines_q3_closed", {"d": 2})])
def test_series_closed_form_matches_counts(name, params):
    s = load_bundled(name, params)
    layers = build_quotients(s.chain, 8, 6, s.aliases())
    inv = series_invariant(layers, s.series_radicals(), s.alg, s.aliases()).series
    counts = layer_counts(layers)
    assert [int(c) for c in inv.weight_totals()] == [counts.get(m, 0) for m in range(9)]
    closed = series_from_expr(s.expand(s.raw["closed_series"]), inv.names, inv.weights, inv.order)
    assert closed == inv


@pytest.mark.parametrize("n,q", SIGNATURES)
def test_free_series_counts_radical_monomials(n, q):
    alg = algebra(n + 1, q)
    ser = free_sheaf_series(alg, 8)
    assert ser.is_integral()
    assert [int(c) for c in ser.weight_totals()] == [
        len(weighted_monomials(alg.weights[alg.n_plus_1:], m)) for m in range(9)]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_lie_space_dimensions(n):
    dims = lie_space_quotient(algebra(n + 1, 2), 2 * ((n + 1) // 2 + 1))
    for m, v in dims.items():
        if m % 2 == 0:
            assert v == comb(n + 1, m)


def test_reduced_commutators():
    s = load_bundled("saddle")
    w = s.chart_value("[x0/x2, x1/x2] @U2", 6)
    red = QuotientReducer(s.chain, w.chart)
    assert render(red.reduce(w)) == "y01"
    t = load_bundled("two_lines", {"d": 2})
    w = t.chart_value("[x1/x0, x2/x0] @U0", 6)
    red = QuotientReducer(t.chain, w.chart)
    assert red.reduce(w) == red.reduce(t.chart_value("y2 + y3 @U0", 6))


def test_reducer_needs_coordinate_chart():
    s = load_bundled("two_lines", {"d": 2})
    with pytest.raises(ChartError):
        QuotientReducer(s.chain, Chart.from_factors(s.alg, [X[0] + X[1]]))
