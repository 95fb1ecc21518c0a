from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linode.errors import DerivativeOrderError, EvaluationError
from linode.expr import (ONE, ZERO, T, NumericLeaf, add, atan, const, cos, derivative,
                         differentiate, equiv_numeric, evaluate, exp, ln, mul, normalize,
                         power, sample, serialize, sin, substitute)

SPAN = (1.0, 2.0)


# -- expression strategy: smooth and finite on [1, 2] -------------------------

small = st.fractions(min_value=-2, max_value=2, max_denominator=7)
leaves = st.one_of(st.just(T), small.map(const))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: add(*p)),
        st.tuples(children, children).map(lambda p: mul(*p)),
        children.map(lambda e: exp(mul(const(Fraction(1, 4)), e))),
        children.map(sin),
        children.map(atan),
        children.map(lambda e: power(add(ONE, power(e, 2)), -1)),
        children.map(lambda e: ln(add(const(2), sin(e)))),
    )


exprs = st.recursive(leaves, _extend, max_leaves=6)


# -- differentiation ----------------------------------------------------------

def test_power_rule():
    assert differentiate(power(T, 2), 1) is mul(const(2), T)


def test_product_rule():
    e = differentiate(mul(exp(T), T), 1)
    assert equiv_numeric(e, mul(exp(T), add(T, ONE)), SPAN, tol=1e-14)


def test_atan_third_derivative():
    e = differentiate(atan(T), 3)
    expected = mul(add(mul(const(6), power(T, 2)), const(-2)), power(add(ONE, power(T, 2)), -3))
    assert equiv_numeric(e, expected, (-2.0, 2.0), tol=1e-13)
    # frozen value at t = 1/2: (6/4 - 2) / (5/4)^3 = -32/125
    assert evaluate(e, 0.5) == pytest.approx(-32 / 125, rel=1e-14)


def test_derivative_of_atan_is_rational():
    assert equiv_numeric(derivative(atan(T)), power(add(ONE, power(T, 2)), -1), (-1.0, 1.0))


def test_derivative_of_zero_order():
    e = sin(T)
    assert differentiate(e, 0) is e


# -- evaluation ---------------------------------------------------------------

@pytest.mark.parametrize("e, t0, value", [
    (exp(T), 0.0, 1.0),
    (power(add(ONE, power(T, 2)), -1), 1.0, 0.5),
    (power(T, -3), 2.0, 0.125),
])
def test_evaluate_examples(e, t0, value):
    assert evaluate(e, t0) == value


def test_singular_evaluation_raises():
    with pytest.raises(EvaluationError):
        evaluate(power(T, -1), 0.0)
    with pytest.raises(EvaluationError):
        evaluate(ln(T), -1.0)


def test_equiv_numeric_examples():
    assert equiv_numeric(add(power(sin(T), 2), power(cos(T), 2)), ONE, (0.0, 1.0))
    assert not equiv_numeric(T, add(T, const(Fraction(1, 1000))), (0.0, 1.0), tol=1e-6)


def test_sample_jitters_off_singularities():
    # 1/t on [-1, 1]: an odd number of Chebyshev points puts one at t = 0
    ts, (v,) = sample([power(T, -1)], (-1.0, 1.0), 51)
    assert np.all(np.isfinite(v)) and np.all(ts != 0.0)


# -- exact arithmetic ---------------------------------------------------------

def test_rational_constants_stay_exact():
    e = add(const(Fraction(1, 3)), const(Fraction(1, 6)))
    assert e.value == Fraction(1, 2)


def test_like_terms_collect():
    assert add(T, T) is mul(const(2), T)
    assert add(T, mul(const(-1), T)) is ZERO


def test_substitute_composes():
    e = substitute(power(T, 2), add(T, ONE))
    assert equiv_numeric(e, add(power(T, 2), mul(const(2), T), ONE), SPAN)


# -- numeric leaves -----------------------------------------------------------

def _exp_leaf():
    leaf = NumericLeaf("q", SPAN, 1, lambda t, k: np.exp(t))
    leaf.set_relation(leaf())
    return leaf


def test_leaf_derivatives_follow_relation():
    leaf = _exp_leaf()
    e = differentiate(leaf(), 3)
    assert evaluate(e, 1.5) == pytest.approx(np.exp(1.5), rel=1e-14)


def test_leaf_derivative_order_exceeded():
    leaf = NumericLeaf("q", SPAN, 2, lambda t, k: np.exp(t), order=2)
    with pytest.raises(DerivativeOrderError):
        differentiate(leaf(), 3)


def test_leaf_out_of_interval():
    with pytest.raises(EvaluationError):
        evaluate(_exp_leaf()(), 3.0)


# -- properties ---------------------------------------------------------------

@given(exprs)
def test_normalize_idempotent(e):
    once = normalize(e)
    assert normalize(once) is once


@given(exprs, st.integers(0, 2), st.integers(0, 2))
def test_derivative_orders_compose(e, j, k):
    assert equiv_numeric(differentiate(e, j + k), differentiate(differentiate(e, j), k), SPAN, tol=1e-9)


@given(exprs)
def test_derivative_matches_central_differences(e):
    h = 1e-5
    ts = np.linspace(1.1, 1.9, 9)
    fd = (evaluate(e, ts + h) - evaluate(e, ts - h)) / (2 * h)
    d = evaluate(differentiate(e, 1), ts)
    scale = 1 + np.abs(d) + np.abs(evaluate(e, ts)) * 1e-5 / h
    assert np.all(np.abs(fd - d) <= 1e-6 * scale)


@given(exprs)
def test_serialize_is_stable(e):
    assert serialize(e) == serialize(normalize(e))
