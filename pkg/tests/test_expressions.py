import math

import pytest
from hypothesis import given, settings, strategies as st

from genusflow import expressions as ex
from genusflow.expressions import (
    Add,
    Const,
    EvaluationError,
    ExprSyntaxError,
    Mul,
    Pow,
    Sub,
    UnknownIdentifierError,
    Var,
    compile_expr,
    diff,
    eval_expr,
    expr_to_str,
    parse_expr,
)


def test_parse_polynomial_structure():
    e = parse_expr("x^2 + y^2 - 1")
    expected = Sub(
        Add(Pow(Var("x"), 2), Pow(Var("y"), 2)),
        Const(1.0),
    )
    assert e == expected


def test_parse_product_structure():
    e = parse_expr("2*sin(t)*y")
    expected = Mul(
        Mul(Const(2.0), ex.Fun("sin", Var("t"))),
        Var("y"),
    )
    assert e == expected


def test_parse_error_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("x +* y")
    assert err.value.offset == 3


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        parse_expr("x + foo")
    assert err.value.name == "foo"
    assert err.value.offset == 4


def test_unknown_function():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("tan(x)")


def test_pow_requires_integer_exponent():
    with pytest.raises(ExprSyntaxError):
        parse_expr("x^y")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x^1.5")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x^-1")


def test_precedence_pow_tighter_than_unary_minus():
    assert eval_expr(parse_expr("-2^2")) == -4.0
    # pow binds the atom, not the negated term
    assert eval_expr(parse_expr("-x^2"), x=3.0) == -9.0


def test_whitespace_insensitive():
    assert parse_expr(" x + 2*y ") == parse_expr("x+2 * y")


def test_diff_polynomial():
    e = parse_expr("x^2 + y^2 - 1")
    assert diff(e, "x") == parse_expr("2*x")
    assert diff(e, "y") == parse_expr("2*y")
    assert diff(e, "t") == Const(0.0)


def test_diff_trig_and_exp():
    assert diff(parse_expr("sin(t)"), "t") == parse_expr("cos(t)")
    d = diff(parse_expr("x*exp(y)"), "y")
    assert eval_expr(d, x=2.0, y=0.5) == pytest.approx(2.0 * math.exp(0.5))
    assert d == parse_expr("x*exp(y)")


def test_diff_quotient():
    e = parse_expr("x/(1 + y^2)")
    d = diff(e, "y")
    for xv, yv in [(1.0, 0.3), (2.0, -1.2)]:
        expected = -xv * 2 * yv / (1 + yv**2) ** 2
        assert eval_expr(d, x=xv, y=yv) == pytest.approx(expected, rel=1e-12)


def test_eval_values():
    assert eval_expr(parse_expr("x^2 + y^2 - 1"), x=1.0, y=0.0) == 0.0
    assert eval_expr(parse_expr("2*sin(t)"), t=math.pi / 2) == pytest.approx(2.0)


def test_eval_division_by_zero():
    with pytest.raises(EvaluationError):
        eval_expr(parse_expr("1/x"), x=0.0)


def test_eval_overflow():
    with pytest.raises(EvaluationError):
        eval_expr(parse_expr("exp(x)"), x=1e4)


def test_print_round_trip_simple():
    for text in [
        "x^2 + y^2 - 1",
        "2*sin(t)*y",
        "-x^2",
        "x - (y - t)",
        "x/(y*t)",
        "(x + y)^3",
        "exp(-(x^2))",
        "1.5*x + 2e-3",
    ]:
        e = parse_expr(text)
        assert parse_expr(expr_to_str(e)) == e


def test_compile_matches_eval():
    e = parse_expr("sin(x)*cos(y) + exp(t/10)*x^3 - y/2")
    f = compile_expr(e)
    for p in [(0.1, 0.2, 0.3), (-1.0, 2.0, 5.0), (3.0, -0.5, 0.0)]:
        assert f(*p) == pytest.approx(eval_expr(e, *p), rel=1e-15)


# ---------------------------------------------------------------------------
# property tests

_leaf = st.sampled_from(
    [Var("x"), Var("y"), Var("t"), Const(1.0), Const(2.0), Const(0.5), Const(3.0)]
)


def _combine(children):
    a, b = children
    op = st.sampled_from(["+", "-", "*", "neg", "sin", "cos", "pow"])

    def build(o):
        if o == "+":
            return ex.add(a, b)
        if o == "-":
            return ex.sub(a, b)
        if o == "*":
            return ex.mul(a, b)
        if o == "neg":
            return ex.neg(a)
        if o == "sin":
            return ex.sin(a)
        if o == "cos":
            return ex.cos(a)
        return ex.pow_(a, 2)

    return op.map(build)


_exprs = st.recursive(
    _leaf, lambda inner: st.tuples(inner, inner).flatmap(_combine), max_leaves=12
)


@given(_exprs)
@settings(max_examples=150, deadline=None)
def test_print_parse_round_trip(e):
    assert parse_expr(expr_to_str(e)) == e


@given(
    _exprs,
    st.sampled_from(["x", "y", "t"]),
    st.floats(-2.0, 2.0),
    st.floats(-2.0, 2.0),
    st.floats(-2.0, 2.0),
)
@settings(max_examples=150, deadline=None)
def test_diff_matches_finite_differences(e, v, xv, yv, tv):
    d = diff(e, v)
    h = 1e-6
    args = {"x": xv, "y": yv, "t": tv}
    lo = dict(args)
    hi = dict(args)
    lo[v] -= h
    hi[v] += h
    fd = (eval_expr(e, **hi) - eval_expr(e, **lo)) / (2 * h)
    sym = eval_expr(d, **args)
    assert sym == pytest.approx(fd, rel=1e-5, abs=1e-5)
