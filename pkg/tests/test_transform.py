from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_l1_transformation, random_ode, random_transformation
from linode.errors import TransformationError
from linode.expr import (ONE, ZERO, T, add, atan, const, derivatives, equiv_numeric, evaluate,
                         evaluate_many, exp, ln, mul, power, sin, sup_norm)
from linode.numeric import solve_linear_ivp
from linode.ode import LinearODE, form_of, residual_many
from linode.transform import (PointTransformation, apply_to_ode, compose, identity, invert,
                              mobius, schwarzian, transformed_coefficients_in_source,
                              transport_solution)


def _same_ode(a, b, tol=1e-9, n=30):
    return all(equiv_numeric(x, y, a.interval, n=n, tol=tol)
               for x, y in zip(a.coeffs + (a.rhs,), b.coeffs + (b.rhs,)))


def _same_tau(a, b, span, tol=1e-10):
    return all(equiv_numeric(x, y, span, tol=tol) for x, y in ((a.T, b.T), (a.X1, b.X1), (a.X0, b.X0)))


def test_identity_leaves_equation_unchanged():
    ode = LinearODE((T, sin(T), ONE), exp(T), (0.0, 1.0))
    assert apply_to_ode(identity((0.0, 1.0)), ode) is ode


def test_exponential_gauge_by_hand():
    # x = e^(-t) x~ in x''' + 3x'' = 0 gives x~''' - 3x~' + 2x~ = 0
    ode = LinearODE((ZERO, ZERO, const(3)), ZERO, (0.0, 1.0))
    out = apply_to_ode(PointTransformation(T, exp(T), ZERO, (0.0, 1.0)), ode)
    assert [c.value for c in out.coeffs] == [2, -3, 0]


def test_log_map_gives_constant_coefficients():
    ode = LinearODE((ZERO, ZERO, ZERO), ZERO, (1.0, np.e))
    out = apply_to_ode(PointTransformation(ln(T), power(T, -1), ZERO, (1.0, np.e)), ode)
    assert (out.interval.lo, out.interval.hi) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert sup_norm(out.coeffs[0], out.interval) <= 1e-12
    assert sup_norm(add(out.coeffs[1], ONE), out.interval) <= 1e-12
    assert sup_norm(out.coeffs[2], out.interval) <= 1e-12
    # solutions 1, e^s, e^-s: x~''' - x~' = 0 has characteristic roots {-1, 0, 1}


def test_transport_examples():
    span = (1.0, np.e)
    tau = PointTransformation(ln(T), power(T, -1), ZERO, span)
    assert equiv_numeric(transport_solution(tau, power(T, 2)), exp(T), (0.0, 1.0), tol=1e-12)
    assert transport_solution(identity((0.0, 1.0)), sin(T)) is sin(T)
    shift = PointTransformation(T, ONE, T, (0.0, 1.0))
    assert transport_solution(shift, ZERO) is T


def test_compose_with_identity():
    tau = PointTransformation(exp(T), add(ONE, power(T, 2)), sin(T), (0.0, 1.0))
    out = compose(identity(tau.target), tau)
    assert out.T is tau.T and out.X1 is tau.X1 and out.X0 is tau.X0


def test_compose_with_inverse():
    tau = PointTransformation(exp(T), add(ONE, power(T, 2)), sin(T), (0.0, 1.0))
    assert _same_tau(compose(tau, invert(tau)), identity(tau.target), tau.target)


def test_mobius_composition_multiplies_matrices():
    r = 3
    t1 = mobius(2, 1, 1, 1, 5, r, (0.0, 1.0))
    t2 = mobius(1, 0, 1, 2, 3, r, t1.target)
    out = compose(t2, t1)
    # (1 0; 1 2)(2 1; 1 1) = (2 1; 4 3); the X1 constant is 5 * 3
    expected = mobius(2, 1, 4, 3, 15, r, (0.0, 1.0))
    assert _same_tau(out, expected, (0.0, 1.0))


def test_inverse_of_affine():
    tau = PointTransformation(add(mul(const(2), T), ONE), const(3), ONE, (0.0, 1.0))
    inv = invert(tau)
    assert inv.T is mul(const(Fraction(1, 2)), add(T, const(-1)))
    assert inv.X1.value == Fraction(1, 3) and inv.X0.value == Fraction(-1, 3)
    assert (inv.interval.lo, inv.interval.hi) == (1.0, 3.0)


def test_inverse_of_log_is_exp():
    inv = invert(PointTransformation(ln(T), ONE, ZERO, (1.0, np.e)))
    assert inv.T is exp(T)


def test_numeric_inverse_for_non_elementary_t():
    # t + sin(t)/2 is monotone but has no closed-form inverse
    tau = PointTransformation(add(T, mul(const(Fraction(1, 2)), sin(T))), ONE, ZERO, (0.0, 2.0))
    S = tau.inverse_T()
    assert S.has_leaves()
    ys = tau.target.chebyshev(20)
    assert np.max(np.abs(evaluate(tau.T, evaluate(S, ys)) - ys)) <= 1e-10


def test_vanishing_jacobian_rejected():
    with pytest.raises(TransformationError) as err:
        PointTransformation(power(T, 2), ONE, ZERO, (-1.0, 1.0)).validate()
    assert err.value.code == "vanishing-jacobian"


def test_vanishing_x1_rejected():
    with pytest.raises(TransformationError) as err:
        PointTransformation(T, T, ZERO, (-1.0, 1.0)).validate()
    assert err.value.code == "vanishing-x1"


def test_schwarzian_of_mobius_vanishes():
    assert sup_norm(schwarzian(mobius(2, 1, 1, 3, 1, 3, (0.0, 1.0)).T), (0.0, 1.0)) <= 1e-13


def test_schwarzian_known_values():
    # S(ln t) = 1/(2t^2), S(atan t) = -2/(1+t^2)^2
    assert equiv_numeric(schwarzian(ln(T)), mul(const(Fraction(1, 2)), power(T, -2)), (1.0, 2.0))
    assert equiv_numeric(schwarzian(atan(T)), mul(const(-2), power(add(ONE, power(T, 2)), -2)),
                         (-1.0, 1.0))


def _transport_residual(ode, tau, seed):
    rng = np.random.default_rng(seed)
    r = ode.order
    sol = solve_linear_ivp(ode, 1.5, rng.uniform(-1, 1, r))
    target = apply_to_ode(tau, ode)
    jets = derivatives(transport_solution(tau, sol.solution), r)
    ts = target.interval.chebyshev(20)
    vals = np.array(evaluate_many(jets, ts))
    res = residual_many(target, vals, ts)
    return float(np.max(np.abs(res) / (1 + np.max(np.abs(vals), axis=0))))


@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_transport_commutes_with_equation_transport(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2)
    tau = random_transformation(rng)
    # relative to the jet size: squeezing maps blow x~^(r) up by |T_t|^-r
    assert _transport_residual(ode, tau, seed) <= 1e-9


@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_compose_acts_as_successive_application(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2)
    t1 = random_transformation(rng)
    t2 = random_transformation(rng, (t1.target.lo, t1.target.hi))
    once = apply_to_ode(compose(t2, t1), ode)
    twice = apply_to_ode(t2, apply_to_ode(t1, ode))
    assert _same_ode(once, twice, tol=1e-7)


@given(st.integers(0, 10 ** 6), st.integers(3, 5))
def test_schwarzian_law(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, degree=2, rational_form=True)
    tau = random_l1_transformation(rng, r, (1.0, 2.0))
    new, _ = transformed_coefficients_in_source(tau, ode)
    k = const(Fraction(r * (r * r - 1), 12))
    lhs = mul(new[r - 2], power(tau.T_t, 2))
    assert equiv_numeric(lhs, add(ode.coeffs[r - 2], mul(const(-1), k, schwarzian(tau.T))),
                         ode.interval, tol=1e-9)
    assert sup_norm(new[r - 1], ode.interval) <= 1e-9


@given(st.integers(0, 10 ** 6))
def test_inverse_laws(seed):
    rng = np.random.default_rng(seed)
    tau = random_transformation(rng)
    assert _same_tau(compose(invert(tau), tau), identity(tau.interval), tau.interval, tol=1e-9)


def test_apply_requires_covering_interval():
    ode = LinearODE((ZERO, ZERO), ZERO, (0.0, 2.0))
    with pytest.raises(TransformationError):
        apply_to_ode(PointTransformation(exp(T), ONE, ZERO, (0.0, 1.0)), ode)


def test_form_is_preserved_by_l1_maps():
    rng = np.random.default_rng(11)
    ode = random_ode(rng, 4, rational_form=True)
    tau = random_l1_transformation(rng, 4, (1.0, 2.0), kind="exp")
    from linode.ode import ClassTag

    assert ClassTag.L1 in form_of(apply_to_ode(tau, ode))
