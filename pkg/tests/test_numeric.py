import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_ode
from linode.errors import SingularityError, SolverError
from linode.expr import (ONE, ZERO, T, add, atan, const, derivative, equiv_numeric, evaluate,
                         exp, mul, power, sin)
from linode.numeric import antiderivative, solve_linear_ivp, solve_linear_ivps
from linode.ode import LinearODE
from linode.reparam import fundamental_system, wronskian


def test_free_particle_constant_solution():
    sol = solve_linear_ivp(LinearODE((ZERO, ZERO), ZERO, (0.0, 1.0)), 0.0, (1.0, 0.0))
    ts = np.linspace(0, 1, 11)
    assert np.max(np.abs(evaluate(sol.solution, ts) - 1)) <= 1e-14


def test_harmonic_oscillator_gives_sine():
    sol = solve_linear_ivp(LinearODE((ONE, ZERO), ZERO, (0.0, np.pi)), 0.0, (0.0, 1.0))
    ts = np.linspace(0, np.pi, 201)
    assert np.max(np.abs(evaluate(sol.solution, ts) - np.sin(ts))) <= 1e-9


def test_third_order_polynomial_exact():
    sol = solve_linear_ivp(LinearODE((ZERO, ZERO, ZERO), ZERO, (0.0, 1.0)), 0.0, (0.0, 0.0, 2.0))
    ts = np.linspace(0, 1, 11)
    assert np.max(np.abs(evaluate(sol.solution, ts) - ts ** 2)) <= 1e-13


def test_inhomogeneous_solution():
    # x'' + x = 1 with x(0) = x'(0) = 0 has x = 1 - cos t
    sol = solve_linear_ivp(LinearODE((ONE, ZERO), ONE, (0.0, 2.0)), 0.0, (0.0, 0.0))
    ts = np.linspace(0, 2, 51)
    assert np.max(np.abs(evaluate(sol.solution, ts) - (1 - np.cos(ts)))) <= 1e-9


def test_solution_derivatives_use_the_equation():
    sol = solve_linear_ivp(LinearODE((ONE, ZERO), ZERO, (0.0, 1.0)), 0.0, (0.0, 1.0))
    d2 = derivative(derivative(sol.solution))
    assert evaluate(d2, 0.5) == pytest.approx(-np.sin(0.5), abs=1e-10)


def test_initial_point_outside_interval():
    with pytest.raises(SolverError):
        solve_linear_ivp(LinearODE((ONE, ZERO), ZERO, (0.0, 1.0)), 2.0, (0.0, 1.0))


def test_singular_coefficient_rejected():
    with pytest.raises(SingularityError):
        solve_linear_ivp(LinearODE((power(T, -1), ZERO), ZERO, (-1.0, 1.0)), 0.5, (1.0, 0.0))


def test_antiderivative_examples():
    assert antiderivative(const(3), 0.0, (0.0, 1.0)) is mul(const(3), T)
    assert antiderivative(power(add(ONE, power(T, 2)), -1), 0.0, (-1.0, 1.0)) is atan(T)
    w = add(ONE, power(T, 2))
    assert antiderivative(mul(power(w, 3), power(w, -3)), 0.0, (0.0, 1.0)) is T


def test_antiderivative_anchor():
    F = antiderivative(exp(T), 1.0, (0.0, 2.0))
    assert evaluate(F, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert evaluate(F, 2.0) == pytest.approx(np.exp(2) - np.e, rel=1e-14)


def test_antiderivative_quadrature_fallback():
    # exp(t^2) has no elementary antiderivative; the leaf integrates it numerically
    F = antiderivative(exp(power(T, 2)), 0.0, (0.0, 1.0))
    assert F.has_leaves()
    assert evaluate(F, 1.0) == pytest.approx(1.4626517459071816, rel=1e-11)


integrands = st.sampled_from([
    power(add(T, const(3)), -2),
    mul(T, exp(T)),
    sin(mul(const(2), T)),
    power(add(power(T, 2), const(4)), -1),
    mul(power(T, 2), power(add(T, const(5)), -1)),
    exp(power(T, 2)),
    mul(sin(T), exp(T)),
])


@given(integrands, st.floats(-1, 1))
def test_antiderivative_then_derivative(e, t0):
    F = antiderivative(e, t0, (-1.0, 1.0))
    assert equiv_numeric(derivative(F), e, (-1.0, 1.0), tol=1e-9)


@given(st.integers(0, 10 ** 6), st.integers(2, 5))
def test_dense_output_residual(seed, r):
    # solutions of these equations grow up to ~1e5 on [1, 2], so the bound is
    # taken relative to the size of the jet
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r)
    init = rng.uniform(-1, 1, r)
    sol = solve_linear_ivp(ode, float(rng.uniform(1, 2)), init)
    ts = ode.interval.linspace(200)
    res = sol.interpolant_residual(ts)
    scale = 1 + np.max(np.abs(sol.jet(ts)))
    assert np.max(np.abs(res)) <= 1e-8 * scale


@given(st.integers(0, 10 ** 6), st.integers(2, 5))
def test_wronskian_matches_abel(seed, r):
    rng = np.random.default_rng(seed)
    ode = random_ode(rng, r, rhs=False)
    t0 = 1.5
    W = wronskian(fundamental_system(ode, t0))
    abel = exp(mul(const(-1), antiderivative(ode.coeffs[r - 1], t0, ode.interval)))
    ts = ode.interval.chebyshev(20)
    w, a = evaluate(W, ts), evaluate(abel, ts)
    assert np.max(np.abs(w - a) / np.abs(a)) <= 1e-7


def test_shared_integration_for_several_jets():
    ode = LinearODE((ONE, ZERO), ZERO, (0.0, 1.0))
    c, s = solve_linear_ivps(ode, 0.0, [(1.0, 0.0), (0.0, 1.0)])
    ts = np.linspace(0, 1, 21)
    assert np.max(np.abs(evaluate(c.solution, ts) - np.cos(ts))) <= 1e-10
    assert np.max(np.abs(evaluate(s.solution, ts) - np.sin(ts))) <= 1e-10
    assert c.trajectory is s.trajectory
