"""Initial value problems, antiderivatives and the numeric leaves they produce.

Integration uses the DOP853 embedded Runge-Kutta pair (order 8, dense output
of degree 7) from scipy, stepped directly so that the caller can stop early
when a gauge condition degenerates.  The dense output polynomials are kept
and evaluated here in vectorized form, together with their first derivative,
which gives an independent check on the solver: the derivative of the
interpolated x^(r-1) must agree with the value the equation prescribes.

Antiderivatives are exact whenever the integrand is a rational function
whose denominator splits over Q into linear factors times a power of one
irreducible quadratic, or one of a few tabulated shapes; anything else falls
back to piecewise Chebyshev quadrature wrapped in a leaf.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import DOP853

from .errors import EvaluationError, SingularityError, SolverError
from .expr import (ONE, ZERO, Expr, Interval, NumericLeaf, Program, T, add,
                   as_expr, as_interval, const, cos, evaluate, exp, leaf_call,
                   ln, mul, neg, power, sin, substitute, tan, atan)
from .expr.core import ADD, FUNC, MUL, POW, _split_coeff
from .expr.poly import (degree, pderiv, pdivmod, pgcd, pinteg, pmul, ppow,
                        poly_expr, rational_roots, to_poly, to_rational, trim)
from .ode import LinearODE

DEFAULT_TOL = 1e-12
QUADRATURE_TOL = 1e-12


# ---------------------------------------------------------------------------
# dense trajectories

class DenseTrajectory:
    """Piecewise DOP853 dense output over [lo, hi], evaluated in vectorized form."""

    def __init__(self, segments, lo, hi, dim):
        segments = sorted(segments, key=lambda s: min(s.t_old, s.t_old + s.h))
        self.lo = float(lo)
        self.hi = float(hi)
        self.dim = dim
        self.seg_hi = np.array([max(s.t_old, s.t_old + s.h) for s in segments])
        self.t_old = np.array([s.t_old for s in segments])
        self.h = np.array([s.h for s in segments])
        self.y_old = np.array([s.y_old for s in segments])  # (nseg, dim)
        self.F = np.array([s.F for s in segments])  # (nseg, 7, dim)
        self.steps = len(segments)

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    def __call__(self, t, with_derivative=False):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        idx = np.searchsorted(self.seg_hi, flat, side="left")
        idx = np.clip(idx, 0, len(self.seg_hi) - 1)
        h = self.h[idx][:, None]
        x = ((flat - self.t_old[idx]) / self.h[idx])[:, None]
        F = self.F[idx]
        y = np.zeros((flat.size, self.dim))
        dy = np.zeros_like(y)
        for i in range(F.shape[1]):
            f = F[:, F.shape[1] - 1 - i, :]
            y += f
            if i % 2 == 0:
                dy = dy * x + y
                y = y * x
            else:
                dy = dy * (1 - x) - y
                y = y * (1 - x)
        y += self.y_old[idx]
        y = y.T.reshape((self.dim,) + t.shape)
        if not with_derivative:
            return y
        dy = (dy / h).T.reshape((self.dim,) + t.shape)
        return y, dy


def integrate(fun, t0, y0, interval, tol=DEFAULT_TOL, keep_going=None, max_steps=200000,
              max_step_fraction=1 / 32):
    """Integrate y' = fun(t, y) from t0 to both ends of interval.

    ``keep_going(t, y)`` may return False to stop a direction; the step that
    violated it is discarded.  Returns a DenseTrajectory over the reached
    subinterval; raises SolverError if nothing beyond t0 was reached.
    """
    span = as_interval(interval)
    y0 = np.asarray(y0, dtype=float)
    segments = []
    reached = {}
    for bound in (span.hi, span.lo):
        if abs(bound - t0) <= 1e-15 * max(1.0, abs(t0)):
            reached[bound] = t0
            continue
        try:
            solver = DOP853(fun, t0, y0, bound, rtol=tol, atol=tol, max_step=max_step_fraction * span.width)
        except (EvaluationError, FloatingPointError) as err:
            raise SolverError(f"right-hand side failed at t0={t0}: {err}") from err
        end = t0
        for _ in range(max_steps):
            if solver.status != "running":
                break
            try:
                msg = solver.step()
            except (EvaluationError, FloatingPointError) as err:
                break
            if solver.status == "failed":
                del msg
                break
            if not np.all(np.isfinite(solver.y)):
                break
            if keep_going is not None and not keep_going(solver.t, solver.y):
                break
            segments.append(solver.dense_output())
            end = solver.t
        reached[bound] = end
    lo, hi = reached[span.lo], reached[span.hi]
    if not segments or hi - lo <= 0:
        raise SolverError(f"integration from t0={t0} made no progress on {span}")
    return DenseTrajectory(segments, lo, hi, y0.size)


# ---------------------------------------------------------------------------
# linear IVPs

@dataclass(frozen=True)
class IVPSolution:
    """A solution of a linear ODE as an expression over one numeric leaf.

    The leaf stores (x, x', ..., x^(r-1)); x^(r) and higher derivatives come
    from the equation itself.
    """

    ode: LinearODE
    t0: float
    init: tuple
    leaf: NumericLeaf
    trajectory: DenseTrajectory
    column: int
    tolerance: float

    @property
    def order(self) -> int:
        return self.ode.order

    @property
    def interval(self) -> Interval:
        return self.leaf.interval

    @property
    def solution(self) -> Expr:
        return leaf_call(self.leaf, 0)

    @property
    def leaves(self):
        """Expressions for x, x', ..., x^(r-1)."""
        return tuple(leaf_call(self.leaf, k) for k in range(self.order))

    def jet(self, t, k: int | None = None):
        """Stored derivatives (x, ..., x^(r-1)) at t, shape (r, ...)."""
        t = np.asarray(t, dtype=float)
        return np.array([self.leaf.values(t, j) for j in range(self.order)])

    def interpolant_residual(self, t) -> np.ndarray:
        """ODE residual using the dense interpolant's own derivative for x^(r)."""
        r = self.order
        k = self.trajectory.dim // r
        y, dy = self.trajectory(t, with_derivative=True)
        top = dy[(r - 1) * k + self.column]
        jets = [y[m * k + self.column] for m in range(r)] + [top]
        from .ode import residual_many

        return residual_many(self.ode, jets, t)


def _companion(ode: LinearODE, ncols: int):
    r = ode.order
    prog = Program(list(ode.coeffs) + [ode.rhs])
    homogeneous = ode.rhs.is_zero()

    def fun(t, y):
        vals = prog(np.array([t]))
        Y = y.reshape(r, ncols)
        out = np.empty_like(Y)
        out[:-1] = Y[1:]
        top = np.zeros(ncols) if homogeneous else np.full(ncols, vals[r][0])
        for m in range(r):
            top = top - vals[m][0] * Y[m]
        out[-1] = top
        return out.reshape(-1)

    return fun


def _check_coefficients(ode: LinearODE, span: Interval):
    ts = np.concatenate([span.linspace(257), span.chebyshev(64)])
    try:
        Program(list(ode.coeffs) + [ode.rhs])(ts)
    except SingularityError as err:
        raise SingularityError(f"coefficient singularity inside {span}: {err}", points=err.points) from err


def solve_linear_ivps(ode: LinearODE, t0: float, inits, tol: float = DEFAULT_TOL,
                      interval=None, keep_going=None, prefix: str = "ivp"):
    """Solve the ODE for several initial jets at once (one shared integration)."""
    span = ode.interval if interval is None else as_interval(interval)
    t0 = float(t0)
    if not span.contains(t0, 1e-12):
        raise SolverError(f"t0={t0} outside {span}")
    r = ode.order
    inits = [tuple(float(v) for v in init) for init in inits]
    for init in inits:
        if len(init) != r:
            raise SolverError(f"initial data needs {r} values, got {len(init)}")
    _check_coefficients(ode, span)
    ncols = len(inits)
    y0 = np.array(inits, dtype=float).T.reshape(-1)
    traj = integrate(_companion(ode, ncols), t0, y0, span, tol, keep_going)
    if keep_going is None and (traj.lo > span.lo + 1e-12 * span.width or traj.hi < span.hi - 1e-12 * span.width):
        raise SolverError(f"step size underflow: reached only [{traj.lo}, {traj.hi}] of {span}")
    relation_coeffs = list(ode.coeffs)
    out = []
    for j, init in enumerate(inits):
        def evaluator(t, k, j=j):
            return traj(t)[k * ncols + j]

        leaf = NumericLeaf(prefix, traj.interval, r, evaluator,
                           provenance={"kind": "linear-ivp", "t0": t0, "init": init, "tol": tol},
                           tolerance=tol)
        terms = [ode.rhs] + [neg(mul(relation_coeffs[m], leaf_call(leaf, m))) for m in range(r)]
        leaf.set_relation(add(*terms))
        out.append(IVPSolution(ode, t0, init, leaf, traj, j, tol))
    return out


def solve_linear_ivp(ode: LinearODE, t0: float, init, tol: float = DEFAULT_TOL) -> IVPSolution:
    return solve_linear_ivps(ode, t0, [init], tol)[0]


# ---------------------------------------------------------------------------
# antiderivatives

def _solve_exact(matrix, rhs):
    """Gauss-Jordan elimination over Fractions."""
    n = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def _sqrt_const(c: Fraction) -> Expr:
    return power(const(c), Fraction(1, 2))


def _log_linear(rho: Fraction, span: Interval) -> Expr:
    """ln|t - rho| written without abs using the side of the interval."""
    if span.lo > rho:
        return ln(add(T, const(-rho)))
    return ln(add(const(rho), neg(T)))


def _integrate_rational(num, den, span: Interval):
    """Antiderivative of num/den (den monic) or None if the denominator does not
    split into rational linear factors and a power of a single quadratic."""
    quot, rem = pdivmod(num, den)
    pieces = [poly_expr(pinteg(quot))] if quot else []
    if not rem:
        return add(*pieces)
    roots = rational_roots(den)
    rest = den
    for rho, mult in roots:
        if span.lo <= rho <= span.hi:
            raise SingularityError(f"integrand has a pole at t = {rho} inside {span}", points=[float(rho)])
        rest = pdivmod(rest, ppow((-rho, Fraction(1)), mult))[0]
    quad, qpow = None, 0
    if degree(rest) > 0:
        sqfree = pdivmod(rest, pgcd(rest, pderiv(rest)))[0]
        if degree(sqfree) != 2:
            return None
        k = degree(rest) // 2
        if ppow(sqfree, k) != rest:
            return None
        p, s = sqfree[1], sqfree[0]
        if p * p - 4 * s >= 0:
            return None
        quad, qpow = sqfree, k
    # unknown numerators, one column per partial fraction
    basis = []
    for rho, mult in roots:
        lin = (-rho, Fraction(1))
        for j in range(1, mult + 1):
            basis.append(("lin", rho, j, pdivmod(den, ppow(lin, j))[0]))
    for j in range(1, qpow + 1):
        cof = pdivmod(den, ppow(quad, j))[0]
        basis.append(("quadB", None, j, pmul(cof, (Fraction(0), Fraction(1)))))
        basis.append(("quadC", None, j, cof))
    n = degree(den)
    matrix = [[(b[3][i] if i < len(b[3]) else Fraction(0)) for b in basis] for i in range(n)]
    target = [(rem[i] if i < len(rem) else Fraction(0)) for i in range(n)]
    sol = _solve_exact(matrix, target)
    if sol is None:
        return None
    coef = {}
    for b, v in zip(basis, sol):
        if b[0] == "lin":
            rho, j = b[1], b[2]
            if v == 0:
                continue
            if j == 1:
                pieces.append(mul(const(v), _log_linear(rho, span)))
            else:
                pieces.append(mul(const(v / (1 - j)), power(add(T, const(-rho)), 1 - j)))
        else:
            coef[(b[0], b[2])] = v
    if quad is not None:
        p, s = quad[1], quad[0]
        qexpr = poly_expr(quad)
        u = add(T, const(p / 2))
        D = s - p * p / 4
        # integrals of 1/q^j by the reduction formula
        ints = {1: mul(power(const(D), Fraction(-1, 2)), atan(mul(u, power(const(D), Fraction(-1, 2)))))}
        for j in range(1, qpow):
            ints[j + 1] = add(
                mul(const(1 / (2 * j * D)), u, power(qexpr, -j)),
                mul(const(Fraction(2 * j - 1, 2 * j) / D), ints[j]))
        for j in range(1, qpow + 1):
            B = coef.get(("quadB", j), Fraction(0))
            C = coef.get(("quadC", j), Fraction(0))
            if B:
                if j == 1:
                    pieces.append(mul(const(B / 2), ln(qexpr)))
                else:
                    pieces.append(mul(const(B / 2 / (1 - j)), power(qexpr, 1 - j)))
            c_rest = C - B * p / 2
            if c_rest:
                pieces.append(mul(const(c_rest), ints[j]))
    return add(*pieces)


def _affine(u: Expr):
    p = to_poly(u, 1)
    if p is None or len(p) != 2:
        return None
    return p[1]


def _integrate_tabulated(rest: Expr, span: Interval):
    """Antiderivative of f(a t + b) for a few elementary f, or None."""
    if rest.kind == FUNC:
        u = rest.args[0]
        a = _affine(u)
        if a is None:
            return None
        name = rest.data
        if name == "exp":
            return mul(const(1 / a), rest)
        if name == "sin":
            return mul(const(-1 / a), cos(u))
        if name == "cos":
            return mul(const(1 / a), sin(u))
        return None
    if rest.kind == POW:
        base, ex = rest.args[0], rest.data
        a = _affine(base)
        if a is not None and ex != -1:
            return mul(const(1 / (a * (ex + 1))), power(base, ex + 1))
        if base.kind == FUNC and base.data == "cos" and ex == -2:
            a = _affine(base.args[0])
            if a is not None:
                return mul(const(1 / a), tan(base.args[0]))
        return None
    return None


def symbolic_antiderivative(e: Expr, span: Interval):
    """Any antiderivative of e in closed form, or None."""
    rat = to_rational(e)
    if rat is not None:
        return _integrate_rational(rat[0], rat[1], span)
    terms = e.args if e.kind == ADD else (e,)
    pieces = []
    for term in terms:
        c, rest = _split_coeff(term)
        if rest is None:
            pieces.append(mul(const(c), T))
            continue
        rat = to_rational(term)
        got = None
        if rat is not None:
            got = _integrate_rational(rat[0], rat[1], span)
        else:
            got = _integrate_tabulated(rest, span)
            if got is not None:
                got = mul(const(c), got)
        if got is None:
            return None
        pieces.append(got)
    return add(*pieces)


class _ChebyshevPiece:
    __slots__ = ("lo", "hi", "coef", "offset")

    def __init__(self, lo, hi, coef, offset):
        self.lo, self.hi, self.coef, self.offset = lo, hi, coef, offset


def _fit_piece(prog: Program, lo: float, hi: float, tol: float):
    """Chebyshev coefficients of the integrand on [lo, hi], or None if 257
    nodes do not resolve it to tol."""
    for n in (17, 33, 65, 129, 257):
        x = np.cos(np.pi * np.arange(n) / (n - 1))
        t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        vals = prog(t)[0]
        coef = cheb.chebfit(x, vals, n - 1)
        scale = max(np.max(np.abs(coef)), 1e-300)
        tail = np.max(np.abs(coef[-3:]))
        if tail <= tol * 0.01 * max(scale, 1.0):
            return coef
    return None


def quadrature_leaf(e: Expr, t0: float, span: Interval, tol: float = QUADRATURE_TOL) -> Expr:
    """F with F(t0) = 0 and F' = e by adaptive piecewise Chebyshev quadrature."""
    prog = Program([e])
    pending = [(span.lo, span.hi)]
    raw = []
    while pending:
        lo, hi = pending.pop()
        coef = _fit_piece(prog, lo, hi, tol)
        if coef is None:
            if hi - lo < 1e-6 * span.width:
                raise SolverError(f"quadrature did not converge near [{lo}, {hi}]")
            mid = 0.5 * (lo + hi)
            pending.extend([(mid, hi), (lo, mid)])
            continue
        # integral in t = mid + half*x: dt = half dx
        icoef = cheb.chebint(coef, lbnd=-1) * (0.5 * (hi - lo))
        raw.append((lo, hi, icoef))
    raw.sort(key=lambda p: p[0])
    pieces = []
    acc = 0.0
    for lo, hi, icoef in raw:
        pieces.append(_ChebyshevPiece(lo, hi, icoef, acc))
        acc += float(cheb.chebval(1.0, icoef))
    bounds = np.array([p.hi for p in pieces])

    def antider(t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        idx = np.clip(np.searchsorted(bounds, flat, side="left"), 0, len(pieces) - 1)
        out = np.empty_like(flat)
        for i in np.unique(idx):
            p = pieces[i]
            sel = idx == i
            x = (2 * flat[sel] - (p.lo + p.hi)) / (p.hi - p.lo)
            out[sel] = p.offset + cheb.chebval(x, p.coef)
        return out.reshape(t.shape)

    base = float(antider(np.array(t0)))

    def evaluator(t, k):
        return antider(t) - base

    leaf = NumericLeaf("quad", span, 1, evaluator,
                       provenance={"kind": "quadrature", "t0": t0, "pieces": len(pieces), "tol": tol},
                       tolerance=tol)
    leaf.set_relation(e)
    return leaf_call(leaf, 0)


def anchor_point(t0: float) -> Fraction:
    """A short rational within 1e-12 of t0 (exact for binary fractions)."""
    exact = Fraction(t0)
    short = exact.limit_denominator(10 ** 6)
    if abs(float(short) - t0) <= 1e-12 * max(1.0, abs(t0)):
        return short
    return exact


def antiderivative(e, t0: float, interval) -> Expr:
    """F with F(t0) = 0 and F' = e on the interval."""
    e = as_expr(e)
    span = as_interval(interval)
    if e.is_zero():
        return ZERO
    try:
        Program([e])(span.chebyshev(33))
    except SingularityError as err:
        raise SingularityError(f"integrand not evaluable on {span}: {err}", points=err.points) from err
    closed = None if e.has_leaves() else symbolic_antiderivative(e, span)
    if closed is not None:
        anchor = anchor_point(float(t0))
        return add(closed, neg(substitute(closed, const(anchor))))
    return quadrature_leaf(e, float(t0), span)
