import pytest
from hypothesis import given, settings

from carlock.expr import LadderOp, Monomial, OperatorExpr, format_expr, normal_order
from carlock.parsing import ExprSyntaxError, parse_expr

from strategies import raw_exprs


def test_single_creator():
    assert parse_expr("a1^") == OperatorExpr((Monomial(1, (LadderOp(1, True),)),))


def test_product_kept_as_written():
    e = parse_expr("a1 a2 a3^")
    assert e.terms == (Monomial(1, (LadderOp(1), LadderOp(2), LadderOp(3, True))),)


def test_terms_not_merged_until_normal_order():
    e = parse_expr("(0.5+0i) a1 + a1")
    assert len(e.terms) == 2
    (term,) = normal_order(e).terms
    assert term.coeff == 1.5


@pytest.mark.parametrize(
    "text, coeff",
    [
        ("2 a1", 2),
        ("(0.5-2i) a1", 0.5 - 2j),
        ("(-1+0.25i) a1", -1 + 0.25j),
        ("1e-3 a1", 1e-3),
        ("- a1", -1),
        ("(2) a1", 2),
    ],
)
def test_coefficients(text, coeff):
    (term,) = parse_expr(text).terms
    assert term.coeff == coeff


def test_parenthesised_sums_distribute():
    e = parse_expr("(a1 + 2 a2) a3^")
    assert [t.coeff for t in e.terms] == [1, 2]
    assert e.terms[1].factors == (LadderOp(2), LadderOp(3, True))


def test_bare_coefficient_is_identity_multiple():
    assert parse_expr("3") == OperatorExpr((Monomial(3),))


@pytest.mark.parametrize(
    "text, position",
    [
        ("a0", 0),
        ("a1.5", 0),
        ("a", 0),
        ("a1 +", 4),
        ("a1 * a2", 3),
        ("(a1 + a2", 8),
        ("2i", 1),
        ("", 0),
    ],
)
def test_syntax_errors_report_position(text, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.position == position


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("a1 + ")
    assert {"ladder", "number"} <= info.value.expected


def test_print_examples():
    assert format_expr(normal_order(parse_expr("a1 a1^"))) == "1 - a1^ a1"
    assert format_expr(OperatorExpr()) == "0"


@settings(max_examples=200)
@given(raw_exprs())
def test_round_trip_canonical(e):
    canon = normal_order(e)
    assert parse_expr(format_expr(canon)) == canon


@settings(max_examples=100)
@given(raw_exprs())
def test_round_trip_raw(e):
    nonzero = [t for t in e.terms if t.coeff != 0]
    back = parse_expr(format_expr(OperatorExpr(tuple(nonzero))))
    assert [(t.coeff, t.factors) for t in back.terms] == [(t.coeff, t.factors) for t in nonzero]
