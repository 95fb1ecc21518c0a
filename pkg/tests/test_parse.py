from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import FIXTURES, load
from linode.expr import ONE, ZERO, T, add, atan, const, exp, ln, mul, power, serialize, sin
from linode.parse import (PARSERS, ParseError, kind_of, parse_document, parse_expression,
                          parse_ode, parse_system, parse_transformation, parse_vector_field,
                          vector_field_document)

from test_expr import exprs


def test_sum_of_power():
    assert parse_expression("t^2 + 1") is add(power(T, 2), ONE)


def test_meta_parameter_r_is_rejected():
    with pytest.raises(ParseError) as err:
        parse_expression("12/(r(r^2-1))")
    assert err.value.code == "unknown-identifier"
    assert "unknown identifier 'r'" in str(err.value)
    assert err.value.span.column == 5


def test_parameter_substitution():
    e = parse_expression("c0/(1+t^2)^3", {"c0": 5})
    assert e is mul(const(5), power(add(ONE, power(T, 2)), -3))


def test_decimal_literals_are_exact():
    assert parse_expression("0.25*t").args[0].value == Fraction(1, 4)


def test_precedence_and_associativity():
    assert parse_expression("2^3^2").value == 512
    assert parse_expression("-t^2") is mul(const(-1), power(T, 2))
    assert parse_expression("1 - 2 - 3").value == -4
    assert parse_expression("8/2/2").value == 2


def test_constants_and_exponentials():
    assert parse_expression("e^t") is exp(T)
    assert parse_expression("exp(1)") is parse_expression("e")
    assert parse_expression("ln(t)") is ln(T)
    assert parse_expression("atan(t)") is atan(T)


@pytest.mark.parametrize("text, code", [
    ("t +", "syntax"),
    ("(t", "syntax"),
    ("t t", "syntax"),
    ("foo(t)", "unknown-identifier"),
    ("x", "unknown-identifier"),
    ("sin(t, t)", "arity"),
    ("t/0", "division-by-zero"),
    ("t^t", "exponent"),
])
def test_rejections_carry_code_and_span(text, code):
    with pytest.raises(ParseError) as err:
        parse_expression(text)
    assert err.value.code == code
    assert err.value.span.line == 1


def test_elementary_equation():
    ode = parse_ode("order = 3\na0 = 0\na1 = 0\na2 = 0\ninterval = [-1, 1]\n")
    assert ode.order == 3 and all(c is ZERO for c in ode.coeffs) and ode.rhs is ZERO
    assert (ode.interval.lo, ode.interval.hi) == (-1.0, 1.0)


def test_euler_member():
    ode = parse_ode("order = 3\na0 = 1/t^3\na1 = 0\na2 = 0\ninterval = [1, 2]\n")
    assert ode.coeffs[0] is power(T, -3)


def test_missing_coefficient():
    with pytest.raises(ParseError) as err:
        parse_ode("order = 3\na0 = 0\na1 = 0\ninterval = [1, 2]\n")
    assert err.value.code == "coefficient-count"


def test_leading_coefficient_must_be_one():
    parse_ode("order = 2\na0 = 0\na1 = 0\na2 = 1\ninterval = [1, 2]\n")
    with pytest.raises(ParseError) as err:
        parse_ode("order = 2\na0 = 0\na1 = 0\na2 = 3\ninterval = [1, 2]\n")
    assert err.value.code == "coefficient-count" and err.value.span.line == 4


def test_unevaluable_coefficient_points_at_its_line():
    with pytest.raises(ParseError) as err:
        parse_ode("order = 2\na0 = 1/t\na1 = 0\ninterval = [-1, 1]\n")
    assert err.value.code == "unevaluable" and err.value.span.line == 2


def test_unknown_and_duplicate_fields():
    with pytest.raises(ParseError) as err:
        parse_ode("order = 2\na0 = 0\na1 = 0\nc = 1\ninterval = [1, 2]\n")
    assert err.value.code == "unknown-field"
    with pytest.raises(ParseError) as err:
        parse_ode("order = 2\na0 = 0\na0 = 1\na1 = 0\ninterval = [1, 2]\n")
    assert err.value.code == "duplicate-field"


def test_identity_transformation():
    tau = parse_transformation("T = t\ninterval = [0, 1]\n")
    assert tau.is_identity_structurally()


def test_log_map_on_one_to_e():
    tau = parse_transformation("T = ln(t)\nX1 = 1/t\ninterval = [1, e]\n")
    assert tau.T is ln(T) and tau.interval.hi == pytest.approx(np.e, rel=1e-15)


def test_square_map_rejected():
    with pytest.raises(ParseError) as err:
        parse_transformation("T = t^2\ninterval = [-1, 1]\n")
    assert err.value.code == "vanishing-jacobian" and err.value.span.line == 1


def test_system_and_vector_field():
    fs = parse_system("order = 2\nchi1 = cos(t)\nchi2 = sin(t)\ninterval = [0, 1]\n")
    assert fs.order == 2
    Q = parse_vector_field("tau = t^2\nxi1 = 2*t\n")
    assert Q.tau is power(T, 2) and Q.xi0 is ZERO


def test_comments_and_params():
    doc = parse_document("# header\nparam c = 3/2\nx = c*t  # trailing\n")
    assert doc.expression("x") is mul(const(Fraction(3, 2)), T)


@pytest.mark.parametrize("path", sorted(p.name for p in FIXTURES.iterdir()))
def test_fixture_round_trip(path):
    text = load(path)
    kind = kind_of(path, text)
    try:
        value = PARSERS[kind](text)
    except ParseError:
        assert path in ("bad_order.ode", "square.tau")
        return
    if kind == "vector-field":
        again = PARSERS[kind](vector_field_document(value))
    else:
        again = PARSERS[kind](value.to_document())
    assert again == value


@given(exprs)
def test_expression_round_trip(e):
    assert parse_expression(serialize(e)) is e


@given(st.lists(exprs, min_size=2, max_size=4), exprs)
def test_ode_round_trip(coeffs, rhs):
    from linode.ode import LinearODE

    ode = LinearODE(tuple(coeffs), rhs, (1.0, 2.0))
    assert parse_ode(ode.to_document()) == ode
