import pytest
from hypothesis import given

from ncproj.hall_lie import (AlgebraSignature, LieElement, bracket, build_hall_basis, dimensions_by_degree,
                             eval_bracket_expr, is_lyndon, lyndon_words, mobius, necklace_dimension,
                             standard_factorization)
from ncproj.parsing import ParseError, UnknownSymbol

from strategies import basis_and


def test_lyndon_words_small_alphabet():
    words = sorted(lyndon_words(2, 4), key=lambda w: (len(w), w))
    assert words == [(0,), (1,), (0, 1), (0, 0, 1), (0, 1, 1), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 1, 1)]
    assert all(is_lyndon(w) for w in words)
    assert not is_lyndon((1, 0)) and not is_lyndon((0, 1, 0, 1))


def test_standard_factorization_takes_longest_lyndon_suffix():
    assert standard_factorization((0, 0, 1)) == ((0,), (0, 1))
    assert standard_factorization((0, 1, 1)) == ((0, 1), (1,))
    assert standard_factorization((0, 0, 1, 1)) == ((0,), (0, 1, 1))


def test_mobius_values():
    assert [mobius(k) for k in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


@pytest.mark.parametrize("gens,q", [(g, q) for g in range(2, 6) for q in range(1, 7)])
def test_dimensions_match_necklace_count(gens, q):
    basis = build_hall_basis(AlgebraSignature(gens, q))
    assert dimensions_by_degree(basis) == [necklace_dimension(gens, d) for d in range(1, q + 1)]


def test_labels_for_three_generators():
    basis = build_hall_basis(AlgebraSignature(3, 3))
    labels = [basis.label(i) for i in range(basis.size)]
    assert labels[:6] == ["x0", "x1", "x2", "y01", "y02", "y12"]
    assert basis.bracket_label(labels.index("y001")) == "[x0,[x0,x1]]"


@given(basis_and(count=2))
def test_bracket_antisymmetric(data):
    _, a, b = data
    assert bracket(a, b) == -bracket(b, a)


@given(basis_and(count=3))
def test_jacobi_identity(data):
    _, a, b, c = data
    total = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
    assert total.is_zero()


@given(basis_and(count=0))
def test_bracket_respects_grading_and_nilpotency(data):
    (basis,) = data
    for i in range(basis.size):
        for j in range(basis.size):
            br = bracket(LieElement.generator(basis, i), LieElement.generator(basis, j))
            deg = basis.degrees[i] + basis.degrees[j]
            if deg > basis.sig.q:
                assert br.is_zero()
            elif not br.is_zero():
                assert br.degree() == deg


def test_bracket_expressions():
    basis = build_hall_basis(AlgebraSignature(3, 3))
    y01 = eval_bracket_expr(basis, "[x0,x1]")
    assert eval_bracket_expr(basis, "[x1,x0]") == -y01
    assert eval_bracket_expr(basis, "[x0,x0]").is_zero()
    assert eval_bracket_expr(basis, "2*[x0,x1] - [x0,x1]") == y01
    # words beyond the nilpotency index vanish
    assert eval_bracket_expr(basis, "[x0,[x0,[x0,x1]]]").is_zero()


def test_jacobi_on_generators_in_basis_form():
    basis = build_hall_basis(AlgebraSignature(3, 3))
    total = (eval_bracket_expr(basis, "[x0,[x1,x2]]") + eval_bracket_expr(basis, "[x1,[x2,x0]]")
             + eval_bracket_expr(basis, "[x2,[x0,x1]]"))
    assert total.is_zero()


def test_bracket_expression_errors():
    basis = build_hall_basis(AlgebraSignature(2, 2))
    with pytest.raises(UnknownSymbol):
        eval_bracket_expr(basis, "[x0,x5]")
    with pytest.raises(ParseError, match="line 1, column 7"):
        eval_bracket_expr(basis, "[x0,x1")
