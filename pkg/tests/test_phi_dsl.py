"""Tests for the symbol expression language."""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from mullab.base_space import SpaceModel
from mullab.errors import DivisionByZeroError, ExpressionSyntaxError, LogOfZeroError
from mullab.phi_dsl import (
    BinaryOp,
    Call,
    ImaginaryUnit,
    Negate,
    Number,
    PhiSpec,
    Power,
    Variable,
    build_phi,
    evaluate,
    parse,
    to_text,
)

POINTS = (0.5, 1.0, 2.0, 3.7)

# canonical text, hand-parenthesized reference
GOLDEN = [
    ("x+1", lambda x: x + 1),
    ("x-1-2", lambda x: (x - 1) - 2),
    ("x-(1-2)", lambda x: x - (1 - 2)),
    ("2*x/3", lambda x: (2 * x) / 3),
    ("x/(2*i)", lambda x: x / (2 * 1j)),
    ("x/x/x", lambda x: (x / x) / x),
    ("x/(x/x)", lambda x: x / (x / x)),
    ("-(x+1)", lambda x: -(x + 1)),
    ("--x", lambda x: -(-x)),
    ("x*-1", lambda x: x * (-1)),
    ("x+-1", lambda x: x + (-1)),
    ("-x^2", lambda x: -(x * x)),
    ("(-x)^2", lambda x: (-x) * (-x)),
    ("(x+1)^2", lambda x: (x + 1) * (x + 1)),
    ("(x^2)^3", lambda x: (x * x) * (x * x) * (x * x)),
    ("x^0", lambda x: 1.0 + 0 * x),
    ("2^10", lambda x: 1024.0 + 0 * x),
    ("i^2", lambda x: -1.0 + 0 * x),
    ("(1+i)^2", lambda x: (1 + 1j) * (1 + 1j) + 0 * x),
    ("x^2-2*x+1", lambda x: ((x * x) - (2 * x)) + 1),
    ("3*(x-1)*(x+1)", lambda x: (3 * (x - 1)) * (x + 1)),
    ("(x+i)*(x-i)", lambda x: (x + 1j) * (x - 1j)),
    ("1-x^3/6", lambda x: 1 - ((x * x * x) / 6)),
    ("0.5*x+0.25", lambda x: (0.5 * x) + 0.25),
    (".5*x", lambda x: 0.5 * x),
    ("exp(i*x)", lambda x: np.exp(1j * x)),
    ("exp(-x^2)", lambda x: np.exp(-(x * x))),
    ("sin(x)^2", lambda x: np.sin(x) * np.sin(x)),
    ("cos(x)*sin(x)", lambda x: np.cos(x) * np.sin(x)),
    ("sin(cos(x))", lambda x: np.sin(np.cos(x))),
    ("abs(x-3)", lambda x: np.abs(x - 3)),
    ("abs(3+4*i)", lambda x: 5.0 + 0 * x),
    ("log(-1)", lambda x: 1j * np.pi + 0 * x),
    ("exp(log(x))", lambda x: x),
    ("-exp(x)", lambda x: -np.exp(x)),
    ("1/x", lambda x: 1 / x),
]

# text, position of the offending token
MALFORMED = [
    ("x+", 2),
    ("(x+1", 4),
    ("x^y", 2),
    ("x^2^3", 3),
    ("foo(x)", 0),
    ("2*$x", 2),
    ("x x", 2),
    ("", 0),
    ("sin x", 4),
    ("x^-1", 2),
    ("3.5.2", 3),
    ("x*)", 2),
    ("x^2.5", 2),
    ("x²", 1),
]


@pytest.mark.parametrize("text,reference", GOLDEN)
def test_golden_round_trip(text, reference):
    """Test that printing a parsed expression gives the canonical text back."""
    assert to_text(parse(text)) == text


@pytest.mark.parametrize("text,reference", GOLDEN)
def test_golden_evaluation(text, reference):
    """Test evaluation against hand-parenthesized references."""
    expr = parse(text)
    for x in POINTS:
        expected = complex(reference(complex(x)))
        assert evaluate(expr, x) == pytest.approx(expected, rel=1e-13, abs=1e-13)


def test_golden_corpus_size():
    """Test that the corpus covers thirty expressions or more."""
    assert len(GOLDEN) >= 30


@pytest.mark.parametrize("text,position", MALFORMED)
def test_malformed_inputs_report_position(text, position):
    """Test the character position of syntax errors."""
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse(text)
    assert excinfo.value.position == position
    assert f"at position {position}" in str(excinfo.value)


@pytest.mark.parametrize(
    "text,position",
    [
        ("(" * 150 + "x" + ")" * 150, 100),
        ("-" * 150 + "x", 100),
        ("exp(" * 150 + "x" + ")" * 150, 400),
        ("+".join(["x"] * 150), 201),
    ],
)
def test_deep_nesting_is_a_syntax_error(text, position):
    """Test that nesting past the depth limit is rejected at the offending token."""
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse(text)
    assert excinfo.value.position == position
    assert "nested deeper than 100" in str(excinfo.value)


def test_nesting_up_to_the_limit_parses():
    text = "(" * 100 + "x" + ")" * 100
    assert evaluate(parse(text), 2.0) == 2.0


def test_large_integer_powers_are_fast():
    """Test square-and-multiply on exponents far beyond a loop."""
    assert evaluate(parse("x^1000000001"), 1j) == 1j
    assert evaluate(parse("x^1000000000"), -1.0) == 1.0
    assert evaluate(parse("x^1000000000"), 0.5) == 0.0
    assert evaluate(parse("x^5"), 2.0) == 32.0


def test_precedence_and_associativity():
    """Test the shape of parsed trees."""
    assert parse("1+2*x") == BinaryOp(
        op="+", left=Number(text="1"), right=BinaryOp(op="*", left=Number(text="2"), right=Variable())
    )
    assert parse("-x^2") == Negate(operand=Power(base=Variable(), exponent=2))
    assert parse("exp(i)") == Call(func="exp", arg=ImaginaryUnit())


def test_whitespace_is_ignored():
    """Test that spaces between tokens do not matter."""
    assert parse(" x ^ 2 +  1 ") == parse("x^2+1")


def test_vectorized_evaluation():
    """Test evaluation over an array of points."""
    values = evaluate(parse("i*x"), np.array([1.0, 2.0, 3.0]))
    assert np.array_equal(values, [1j, 2j, 3j])


def test_division_by_zero_reports_point():
    """Test the point index of a vanishing divisor."""
    with pytest.raises(DivisionByZeroError) as excinfo:
        evaluate(parse("1/(x-2)"), np.array([1.0, 2.0, 3.0]))
    assert excinfo.value.point == 1


def test_log_of_zero():
    """Test log applied to zero."""
    with pytest.raises(LogOfZeroError):
        evaluate(parse("log(x)"), 0.0)


def test_phi_spec_parses_entries():
    """Test that a symbol spec validates every entry."""
    spec = PhiSpec(entries=("i*x", "-x^2"))
    assert spec.dimension == 2
    assert spec.expressions[1] == parse("-x^2")
    with pytest.raises(ExpressionSyntaxError):
        PhiSpec(entries=("i*x", "x+"))


def test_build_phi(naturals):
    """Test sampling a symbol on a space."""
    phi = build_phi(PhiSpec(entries=("i*x", "-x^2")), naturals)
    assert phi.diag.shape == (100, 2)
    assert phi.diag[9, 0] == 10j
    assert phi.diag[9, 1] == -100.0


def test_build_phi_names_failing_point():
    """Test that evaluation errors carry the point of failure."""
    grid = SpaceModel.interval_grid(0.0, 2.0, 0.5)
    with pytest.raises(DivisionByZeroError, match="x = 0") as excinfo:
        build_phi(PhiSpec(entries=("1/x",)), grid)
    assert excinfo.value.point == 0


numbers = st.sampled_from(["0", "1", "2", "10", "0.5", "3.25"]).map(lambda t: Number(text=t))
leaves = st.one_of(numbers, st.just(ImaginaryUnit()), st.just(Variable()))


def _extend(children):
    return st.one_of(
        children.map(lambda e: Negate(operand=e)),
        st.builds(
            lambda op, left, right: BinaryOp(op=op, left=left, right=right),
            st.sampled_from(["+", "-", "*", "/"]),
            children,
            children,
        ),
        st.builds(lambda base, k: Power(base=base, exponent=k), children, st.integers(0, 4)),
        st.builds(
            lambda f, arg: Call(func=f, arg=arg),
            st.sampled_from(["exp", "sin", "cos", "log", "abs"]),
            children,
        ),
    )


@seed(1)
@settings(max_examples=200, deadline=None)
@given(expr=st.recursive(leaves, _extend, max_leaves=12))
def test_printer_round_trip_property(expr):
    """Test parse(to_text(e)) == e on generated trees."""
    assert parse(to_text(expr)) == expr
