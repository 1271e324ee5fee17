import pytest
from hypothesis import given, strategies as st

from ncproj.ideals_chains import (GradedSubmodule, NotHomogeneous, chain_sum_ideal_check,
                                  compare_with_chain, decompose_nc_graded, differential_closure,
                                  divisibility_fast_path, full_chain, infinite_quantization_check,
                                  is_chain, is_closure_certificate, is_differential_chain,
                                  minimal_generators, reverify_witness, trivial_chain)
from ncproj.nc_algebra import algebra
from ncproj.parsing import evaluate_nc, parse
from ncproj.poly import Poly
from ncproj.session import load_bundled

from strategies import forms

X = [Poly.var(3, i) for i in range(3)]


@pytest.mark.parametrize("n,q", [(1, 2), (2, 2), (1, 3)])
def test_trivial_and_full_chains_are_differential(n, q):
    alg = algebra(n + 1, q)
    for chain in (trivial_chain(alg), full_chain(alg)):
        assert is_differential_chain(chain, 4).passed
        assert is_chain(chain, 4).passed


@pytest.mark.parametrize("name,params", [("two_lines", {"d": 2}), ("saddle", {}), ("heisenberg", {})])
def test_bundled_chains_pass(name, params):
    s = load_bundled(name, params)
    assert is_differential_chain(s.chain, 6).passed
    assert chain_sum_ideal_check(s.chain, 5).passed


def test_failing_chain_gives_sound_witness():
    s = load_bundled("two_lines_q3", {"d": 2})
    rep = is_differential_chain(s.chain, 5)
    assert not rep.passed
    assert reverify_witness(s.chain, rep)
    w = rep.witness.as_dict()
    assert w["source_layer"] == 2 and w["target_layer"] == 3


def test_broken_chain_detected():
    # I_0 = (x1) alone is not a chain: x1 * y01 must land in I_2 = 0
    alg = algebra(2, 2)
    chain = trivial_chain(alg)
    chain.layers = {0: GradedSubmodule(alg, 0, [alg.gen(1)]), 2: GradedSubmodule.zero(alg, 2)}
    rep = is_chain(chain, 4)
    assert not rep.passed
    assert reverify_witness(chain, rep)


@pytest.mark.parametrize("name,params", [("two_lines", {"d": 2}), ("two_lines", {"d": 3}), ("saddle", {})])
def test_decomposition_round_trip(name, params):
    s = load_bundled(name, params)
    res = decompose_nc_graded(s.alg, s.chain.sum_generators(5), 5)
    assert res.ok
    assert compare_with_chain(res, s.chain) is None
    rebuilt = res.to_chain_spec(s.alg)
    assert compare_with_chain(res, rebuilt) is None


def test_decomposition_detects_non_graded_ideal():
    alg = algebra(2, 2)
    res = decompose_nc_graded(alg, [evaluate_nc(parse("x0^2 + y01"), alg)], 4)
    assert not res.ok
    assert res.offending_degree == 2
    ok = decompose_nc_graded(alg, [evaluate_nc(parse("x0*x1"), alg)], 4)
    assert ok.ok


def test_decomposition_rejects_inhomogeneous():
    alg = algebra(2, 2)
    with pytest.raises(NotHomogeneous):
        decompose_nc_graded(alg, [evaluate_nc(parse("x0 + x1^2"), alg)], 3)


def test_closure_verdicts():
    parabola = X[0] * X[1] - X[2] ** 2
    v = infinite_quantization_check([parabola], 10, "closure")
    assert not v.answer and v.definitive
    assert v.summary() == "NO (definitive): all pairs reach a unit"
    f = (X[0] + X[1]) * X[2] ** 2
    assert infinite_quantization_check([f], 10, "closure").answer
    assert divisibility_fast_path(f) == 2
    fast = infinite_quantization_check([f], 10, "auto")
    assert fast.method == "divisibility" and fast.dividing_variable == 2


@given(forms(2, 2).map(lambda g: Poly(3, {e + (0,): c for e, c in g.terms.items()})), st.integers(1, 3))
def test_closure_of_g_times_power(g, d):
    f = g * X[2] ** d
    res = differential_closure([f], (0, 1), 12)
    assert res.proper
    assert minimal_generators(res.generators, 3, 12) == [X[2] ** d]
    assert is_closure_certificate([f], [X[2]], (0, 1), 12)
    assert is_closure_certificate([f], [X[2] ** d], (0, 1), 12)
    assert not is_closure_certificate([f], [Poly.constant(3, 1)], (0, 1), 12)


def test_closure_certificate_rejects_unstable_ideal():
    f = X[2] ** 2
    assert not is_closure_certificate([f], [X[0] * X[2]], (0, 1), 8)


def test_closure_needs_q2():
    with pytest.raises(ValueError):
        differential_closure([X[2]], (0, 1), 4, q=3)
