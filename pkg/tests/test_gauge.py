from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_ode
from linode.errors import GaugeError
from linode.expr import (ONE, ZERO, T, add, const, derivatives, equiv_numeric, evaluate_many,
                         exp, mul, power, sup_norm)
from linode.gauge import to_arnold1, to_arnold2, to_laguerre_forsyth, to_rational
from linode.numeric import solve_linear_ivp
from linode.ode import ClassTag, LinearODE, form_of, residual_many
from linode.transform import PointTransformation, apply_to_ode, schwarzian, transport_solution


def _sup(e, span):
    return sup_norm(e, span, 50)


def test_rational_form_already():
    ode = LinearODE((T, ONE, ZERO), ZERO, (0.0, 1.0))
    res = to_rational(ode)
    assert res.transformation.is_identity_structurally() and res.ode is ode


def test_rational_gauge_constant_coefficient():
    ode = LinearODE((ZERO, ZERO, const(3)), ZERO, (0.0, 1.0))
    res = to_rational(ode)
    # X1 = exp(t - 1/2): the anchor only rescales x~
    assert equiv_numeric(res.transformation.X1, exp(add(T, const(Fraction(-1, 2)))), (0.0, 1.0))
    assert [c.value for c in res.ode.coeffs] == [2, -3, 0]


def test_rational_gauge_euler_second_order():
    ode = LinearODE((ZERO, mul(const(2), power(T, -1))), ZERO, (1.0, 2.0))
    res = to_rational(ode)
    X1 = res.transformation.X1
    ratio = mul(X1, power(T, -1))
    assert _sup(add(ratio, mul(const(-1), const(1 / 1.5))), (1.0, 2.0)) <= 1e-12
    assert res.ode.coeffs[1].is_zero()


def test_lf_with_zero_subleading_keeps_t():
    ode = LinearODE((T, ZERO, ZERO), ZERO, (0.0, 1.0))
    res = to_laguerre_forsyth(ode)
    assert res.transformation.T is T


@pytest.mark.parametrize("ode", [
    LinearODE((const(2), const(-1), ZERO), ZERO, (0.0, 1.0)),
    LinearODE((ZERO, ZERO, power(add(ONE, power(T, 2)), -1), ZERO), ZERO, (0.0, 1.0)),
])
def test_lf_gauge_examples(ode):
    res = to_laguerre_forsyth(ode)
    r = ode.order
    assert _sup(res.ode.coeffs[r - 2], res.ode.interval) <= 1e-7
    assert _sup(res.ode.coeffs[r - 1], res.ode.interval) <= 1e-7


def test_lf_needs_third_order():
    with pytest.raises(GaugeError):
        to_laguerre_forsyth(LinearODE((ONE, ZERO), ZERO, (0.0, 1.0)))


def test_arnold1_already():
    ode = LinearODE((ZERO, T, ONE), ZERO, (0.0, 1.0))
    assert to_arnold1(ode).transformation.is_identity_structurally()


def test_arnold1_exponential_solution_by_hand():
    # phi1 = e^t solves x'' - x = 0; x = e^t x~ gives x~'' + 2x~' = 0
    ode = LinearODE((const(-1), ZERO), ZERO, (0.0, 1.0))
    out = apply_to_ode(PointTransformation(T, exp(mul(const(-1), T)), ZERO, (0.0, 1.0)), ode)
    assert [c.value for c in out.coeffs] == [0, 2]
    res = to_arnold1(ode)
    assert _sup(res.ode.coeffs[0], res.ode.interval) <= 1e-9


def test_arnold1_third_order():
    res = to_arnold1(LinearODE((ONE, ZERO, ZERO), ZERO, (0.0, 1.0)))
    assert _sup(res.ode.coeffs[0], res.ode.interval) <= 1e-7


def test_arnold2_free_particle():
    res = to_arnold2(LinearODE((const(-1), ZERO), ZERO, (-1.0, 1.0)))
    assert all(_sup(c, res.ode.interval) <= 1e-7 for c in res.ode.coeffs)


def test_arnold2_identity_on_elementary():
    ode = LinearODE((ZERO, ZERO, ZERO), ZERO, (0.0, 1.0))
    assert to_arnold2(ode).transformation.is_identity_structurally()


def test_arnold2_third_order():
    res = to_arnold2(LinearODE((ZERO, ONE, ZERO), ZERO, (0.0, 1.0)))
    assert _sup(res.ode.coeffs[0], res.ode.interval) <= 1e-7
    assert _sup(res.ode.coeffs[1], res.ode.interval) <= 1e-7


def test_arnold_shrinks_past_a_zero_of_the_solution():
    # cos(3t) vanishes at pi/6 inside [0, 1]
    res = to_arnold1(LinearODE((const(9), ZERO), ZERO, (0.0, 1.0)), t0=0.0)
    assert res.ode.interval.hi < np.pi / 6
    assert "shrunk" in res.diagnostics


def _master_oracle(result, source):
    r = source.order
    tau = result.transformation
    sol = solve_linear_ivp(source, tau.interval.midpoint, [0.5] * r)
    jets = derivatives(transport_solution(tau, sol.solution), r)
    ts = result.ode.interval.shrink(0.01).chebyshev(20)
    vals = np.array(evaluate_many(jets, ts))
    res = residual_many(result.ode, vals, ts)
    return float(np.max(np.abs(res) / (1 + np.max(np.abs(vals), axis=0))))


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6), st.integers(3, 5))
def test_gauge_results_satisfy_master_oracle(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2)
    for gauge in (to_rational, to_laguerre_forsyth, to_arnold1):
        result = gauge(ode)
        src = ode.with_interval(result.transformation.interval)
        assert _master_oracle(result, src) <= 1e-8


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6), st.integers(3, 5))
def test_gauge_chains_reach_the_strongest_form(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2)
    lf = to_laguerre_forsyth(to_rational(ode).ode)
    assert ClassTag.L2 in form_of(lf.ode, tol=1e-7)
    a1 = to_arnold1(ode)
    a2 = to_arnold2(a1.ode)
    assert ClassTag.A2 in form_of(a2.ode, tol=1e-6)


@given(st.integers(0, 10 ** 6))
def test_second_order_arnold2_is_free_particle(seed):
    rng = np.random.default_rng(seed)
    res = to_arnold2(random_ode(rng, 2))
    assert all(_sup(c, res.ode.interval) <= 1e-7 for c in res.ode.coeffs)


@given(st.integers(0, 10 ** 6), st.integers(3, 5), st.booleans())
def test_lf_map_is_mobius_iff_subleading_vanishes(seed, r, zero_sub):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2, rational_form=True)
    if zero_sub:
        coeffs = list(ode.coeffs)
        coeffs[r - 2] = ZERO
        ode = LinearODE(tuple(coeffs), ode.rhs, ode.interval)
    res = to_laguerre_forsyth(ode)
    s = _sup(schwarzian(res.transformation.T), res.transformation.interval)
    assert (s <= 1e-8) == zero_sub
