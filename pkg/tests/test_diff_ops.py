import pytest
from hypothesis import given

from ncproj.diff_ops import (apply, build_D, build_delta, build_delta_jk, build_nabla, build_nabla_jk,
                             build_nabla_prime, left_mult_op, operators_equal, render, right_mult_op)
from ncproj.nc_algebra import algebra, diagonal_mul, layer_component, multiply

from strategies import SIGNATURES, SMALL_SIGNATURES, algebra_and, nc_elements


@given(algebra_and(nc_elements))
def test_left_regular_representation(data):
    alg, a = data
    for j in range(alg.nvars):
        assert left_mult_op(a, j) == multiply(alg.gen(j), a)


@given(algebra_and(nc_elements))
def test_right_regular_representation_two_ways(data):
    alg, a = data
    for j in range(alg.nvars):
        expected = multiply(a, alg.gen(j))
        assert right_mult_op(a, j) == expected
        assert diagonal_mul(j, a) + apply(build_nabla_prime(alg, j), a) == expected


@pytest.mark.parametrize("n,q", SIGNATURES)
def test_split_operators_sum_to_full(n, q):
    alg = algebra(n + 1, q)
    for j in range(alg.nvars):
        parts = range(q - alg.weights[j] + 1)
        delta = build_delta_jk(alg, j, 0)
        nabla = build_nabla_jk(alg, j, 0)
        for k in parts[1:]:
            delta = delta + build_delta_jk(alg, j, k)
            nabla = nabla + build_nabla_jk(alg, j, k)
        assert delta.terms == build_delta(alg, j).terms
        assert nabla.terms == build_nabla(alg, j).terms


@given(algebra_and(nc_elements, SMALL_SIGNATURES))
def test_split_operator_layer_shift(data):
    alg, a = data
    k0 = alg.n_plus_1
    for (e, m), part in _layers(a).items():
        for j in range(alg.nvars):
            for k in range(alg.q - alg.weights[j] + 1):
                for build in (build_delta_jk, build_nabla_jk):
                    out = apply(build(alg, j, k), part)
                    if e < k:
                        assert not out
                    else:
                        assert layer_component(out, e - k, m + alg.weights[j] + k) == out


def _layers(a):
    from ncproj.nc_algebra import layers
    return layers(a)


@pytest.mark.parametrize("n,q", [(1, 2), (1, 3), (2, 3), (1, 4)])
def test_D_closed_form_matches_iterated_commutator(n, q):
    alg = algebra(n + 1, q)
    for i in range(alg.n_plus_1):
        for l in range(q):
            a, b = build_D(alg, i, l, "closed"), build_D(alg, i, l, "operator")
            ok, witness, _ = operators_equal(lambda t: apply(a, t), lambda t: apply(b, t), alg, 2 * q)
            assert ok, witness


def test_operator_rendering():
    alg = algebra(2, 2)
    assert render(build_delta(alg, 1)) == "R(-y01) . dx0"
    assert render(build_nabla(alg, 0)) == "R(-y01) . dx1"
    assert render(build_delta(alg, 0)) == "0"


def test_operator_index_errors():
    alg = algebra(2, 2)
    with pytest.raises(IndexError):
        build_delta_jk(alg, 0, 5)
    with pytest.raises(IndexError):
        build_D(alg, 0, 2)
