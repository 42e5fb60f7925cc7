import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carlock.expr import (
    LadderOp,
    Monomial,
    OperatorExpr,
    ParityClass,
    add,
    adjoint,
    ann,
    anticommutator,
    commutator,
    cre,
    even_odd_split,
    identity,
    multiply,
    normal_order,
    parity_of,
    scale,
    support,
)
from carlock.fock import jw_matrix
from carlock.parsing import parse_expr

from strategies import raw_exprs


def P(text):
    return normal_order(parse_expr(text))


def test_ladder_op_rejects_bad_modes():
    with pytest.raises(ValueError):
        LadderOp(0)
    with pytest.raises(TypeError):
        LadderOp(1.5)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("a1 a1^", "1 - a1^ a1"),
        ("a1 a1", "0"),
        ("a1^ a1^", "0"),
        ("a2 a1^", "-a1^ a2"),
        ("(0.5+0i) a1 + a1", "1.5 a1"),
        ("a1 a2", "-a2 a1"),
        ("a2^ a1^", "-a1^ a2^"),
    ],
)
def test_normal_order_examples(text, expected):
    assert str(normal_order(parse_expr(text))) == expected


def test_arithmetic_examples():
    assert multiply(cre(1), ann(1)) == P("a1^ a1")
    assert multiply(ann(1), cre(1)) == P("1 - a1^ a1")
    assert add(ann(1), scale(-1, ann(1))).is_zero()
    assert (ann(1) - ann(1)).is_zero()
    assert 2 * ann(1) == P("2 a1")


def test_adjoint_examples():
    assert adjoint(ann(1)) == cre(1)
    x = P("a1 + a1^")
    assert adjoint(x) == x
    # conj(i) a2^ a1^ = -i a2^ a1^ = i a1^ a2^
    assert adjoint(normal_order(1j * ann(1) * ann(2))) == P("(0+1i) a1^ a2^")


@pytest.mark.parametrize(
    "text, parity",
    [
        ("a1 a2 a3^", ParityClass.ODD),
        ("a1 a2 a3^ a4", ParityClass.EVEN),
        ("a2^ a1", ParityClass.EVEN),
        ("a1 + a1^ a1", ParityClass.MIXED),
        ("0", ParityClass.ZERO),
        ("1", ParityClass.EVEN),
    ],
)
def test_parity_examples(text, parity):
    assert parity_of(P(text)) is parity


def test_even_odd_split_examples():
    assert even_odd_split(P("a1 + a1^ a1")) == (P("a1^ a1"), P("a1"))
    even, odd = even_odd_split(P("a1 + a1^"))
    assert even.is_zero() and odd == P("a1 + a1^")
    assert even_odd_split(identity()) == (identity(), OperatorExpr())


def test_brackets():
    assert anticommutator(ann(1), cre(1)) == identity()
    assert anticommutator(ann(1), ann(2)).is_zero()
    assert commutator(ann(1), ann(2)) == P("2 a1 a2")
    assert support(P("a3^ a1 + a7")) == {1, 3, 7}


def test_pruning_threshold():
    assert normal_order(OperatorExpr((Monomial(1e-13, (LadderOp(1),)),))).is_zero()
    assert not normal_order(OperatorExpr((Monomial(1e-11, (LadderOp(1),)),))).is_zero()


# ----------------------------------------------------------------- properties

@settings(max_examples=250)
@given(raw_exprs())
def test_normal_order_idempotent(e):
    once = normal_order(e)
    assert normal_order(once) == once


@settings(max_examples=200)
@given(raw_exprs())
def test_canonical_form_invariants(e):
    canon = normal_order(e)
    seqs = [t.factors for t in canon.terms]
    assert len(seqs) == len(set(seqs))
    for t in canon.terms:
        assert t.is_canonical()
        assert abs(t.coeff) >= 1e-12
        creators = [op.mode for op in t.factors if op.dagger]
        annihilators = [op.mode for op in t.factors if not op.dagger]
        assert list(t.factors[: len(creators)]) == [LadderOp(m, True) for m in creators]
        assert creators == sorted(set(creators))
        assert annihilators == sorted(set(annihilators), reverse=True)


@settings(max_examples=200)
@given(raw_exprs())
def test_normal_order_preserves_matrix(e):
    assert np.max(np.abs(jw_matrix(normal_order(e), 6) - jw_matrix(e, 6))) <= 1e-10


@settings(max_examples=200)
@given(raw_exprs())
def test_adjoint_involution(e):
    assert adjoint(adjoint(e)) == normal_order(e)


@settings(max_examples=100)
@given(raw_exprs(max_len=4))
def test_adjoint_matches_conjugate_transpose(e):
    assert np.max(np.abs(jw_matrix(adjoint(e), 6) - jw_matrix(e, 6).conj().T)) <= 1e-10


@given(st.integers(1, 50))
def test_nilpotence(i):
    assert multiply(ann(i), ann(i)).is_zero()
    assert multiply(cre(i), cre(i)).is_zero()


@settings(max_examples=200)
@given(raw_exprs())
def test_split_reassembles(e):
    even, odd = even_odd_split(e)
    assert add(even, odd) == normal_order(e)
    assert parity_of(even) in (ParityClass.EVEN, ParityClass.ZERO)
    assert parity_of(odd) in (ParityClass.ODD, ParityClass.ZERO)


@settings(max_examples=150)
@given(raw_exprs(max_len=3, max_terms=3), raw_exprs(max_len=3, max_terms=3))
def test_grading_of_products(e1, e2):
    (x_even, x_odd), (y_even, y_odd) = even_odd_split(e1), even_odd_split(e2)
    for x, px in ((x_even, 0), (x_odd, 1)):
        for y, py in ((y_even, 0), (y_odd, 1)):
            prod = multiply(x, y)
            expected = ParityClass.ODD if (px + py) % 2 else ParityClass.EVEN
            assert parity_of(prod) in (expected, ParityClass.ZERO)


@settings(max_examples=100)
@given(raw_exprs(max_len=3, max_terms=3), raw_exprs(max_len=3, max_terms=3))
def test_multiply_is_matrix_product(e1, e2):
    lhs = jw_matrix(multiply(e1, e2), 6)
    rhs = jw_matrix(e1, 6) @ jw_matrix(e2, 6)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
