import pytest
from hypothesis import given, strategies as st

from ncproj.hall_lie import bracket, LieElement
from ncproj.nc_algebra import (algebra, commutator, commutator_expand, epsilon, filtration_level,
                               graded_component, homogeneous_degree, layer_dimension, layers, multiply,
                               render, star_product_q2, tau)
from ncproj.parsing import evaluate_nc, parse

from strategies import SIGNATURES, SMALL_SIGNATURES, algebra_and, nc_elements, polys


@given(algebra_and(nc_elements, SMALL_SIGNATURES, count=3))
def test_associativity(data):
    _, a, b, c = data
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@given(algebra_and(nc_elements, count=2))
def test_epsilon_is_multiplicative(data):
    _, a, b = data
    assert epsilon(multiply(a, b)) == epsilon(a) * epsilon(b)


@given(st.sampled_from(SIGNATURES).flatmap(lambda s: st.tuples(st.just(s), polys(s[0] + 1))))
def test_tau_is_a_section_of_epsilon(data):
    (n, q), p = data
    assert epsilon(tau(algebra(n + 1, q), p)) == p


@given(algebra_and(nc_elements, count=2))
def test_product_is_graded(data):
    alg, a, b = data
    for d1 in range(7):
        for d2 in range(7):
            prod = multiply(graded_component(a, d1), graded_component(b, d2))
            assert graded_component(prod, d1 + d2) == prod


@pytest.mark.parametrize("n,q", SIGNATURES)
def test_generator_commutators_are_hall_brackets(n, q):
    alg = algebra(n + 1, q)
    basis = alg.basis
    for i in range(alg.nvars):
        for j in range(alg.nvars):
            lie = bracket(LieElement.generator(basis, i), LieElement.generator(basis, j))
            assert commutator(alg.gen(i), alg.gen(j)) == alg.from_lie(lie)


def test_basic_products():
    alg = algebra(2, 2)
    assert render(multiply(alg.gen(1), alg.gen(0))) == "x0*x1 - y01"
    assert render(evaluate_nc(parse("x0*x1 - [x0,x1]"), alg)) == "x0*x1 - y01"
    alg3 = algebra(2, 3)
    # x1 x0^2 = x0^2 x1 - 2 x0 y01 + y001
    assert render(evaluate_nc(parse("x1*x0^2"), alg3)) == "x0^2*x1 - 2*x0*y01 + y001"


@given(st.sampled_from([1, 2, 3]).flatmap(lambda n: st.tuples(st.just(n), polys(n + 1, 3), polys(n + 1, 3))))
def test_closed_q2_product_formula(data):
    n, f, g = data
    alg = algebra(n + 1, 2)
    assert star_product_q2(alg, f, g) == multiply(tau(alg, f), tau(alg, g))


def test_closed_formula_needs_q2():
    alg = algebra(3, 3)
    with pytest.raises(ValueError):
        star_product_q2(alg, tau(alg, alg.gen(0).as_poly()).as_poly(), alg.gen(0).as_poly())


@given(algebra_and(nc_elements, SMALL_SIGNATURES, count=1), st.data())
def test_commutator_expansions(data, draw):
    alg, a = data
    p = draw.draw(polys(alg.n_plus_1, 2))
    target = commutator(a, tau(alg, p))
    assert commutator_expand(a, p, "left") == target
    assert commutator_expand(a, p, "right") == target


def test_layers_and_filtration():
    alg = algebra(3, 2)
    a = evaluate_nc(parse("x2*x1*x0"), alg)
    assert homogeneous_degree(a) == 3
    assert filtration_level(a) == 0
    parts = layers(a)
    assert set(parts) == {(3, 0), (1, 2)}
    assert sum(parts.values(), alg.zero()) == a
    assert layer_dimension(alg, 1, 2) == 9
