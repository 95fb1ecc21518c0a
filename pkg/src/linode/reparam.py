"""Fundamental systems, Wronskians and recovery of an equation from its solutions.

An r-th order homogeneous equation is determined by any fundamental system
chi_1..chi_r through W(chi_1, ..., chi_r, x) / W(chi_1, ..., chi_r) = 0.
Expanding the bordered determinant along its last column gives

    a_m = (-1)^(r+m) M_m / W,

with M_m the minor of the derivative matrix (rows 0..r, columns chi_j) that
omits row m.  Determinants are exact cofactor expansions over expressions,
memoized on row subsets, so the cost stays at 2^(r+1) minors.

Fundamental systems are only defined up to chi~ = mu chi with det mu != 0;
GaugeMatrix carries mu (and an optional constant shift nu used for the
homogeneous classes, x~ = X1 (x + nu_j chi_j)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EvaluationError, LinodeError, WronskianError
from .expr import (ONE, ZERO, Expr, Interval, T, add, as_expr, as_interval, const,
                   derivatives, mul, power, sample, serialize, sub)
from .numeric import DEFAULT_TOL, solve_linear_ivps
from .ode import ClassTag, LinearODE
from .transform import PointTransformation

WRONSKIAN_SAMPLES = 50
WRONSKIAN_FLOOR = 1e-12


@dataclass(frozen=True)
class FundamentalSystem:
    chis: tuple
    interval: Interval

    def __post_init__(self):
        chis = tuple(as_expr(c) for c in self.chis)
        if not chis:
            raise LinodeError("a fundamental system needs at least one function", code="order")
        object.__setattr__(self, "chis", chis)
        object.__setattr__(self, "interval", as_interval(self.interval))

    @property
    def order(self) -> int:
        return len(self.chis)

    def derivative_matrix(self, rows: int | None = None):
        """M[i][j] = chi_j^(i) for i < rows (default r)."""
        rows = self.order if rows is None else rows
        cols = [derivatives(c, rows - 1) for c in self.chis]
        return [[cols[j][i] for j in range(self.order)] for i in range(rows)]

    def to_document(self, rename=None) -> str:
        lines = [f"order = {self.order}"]
        lines += [f"chi{i + 1} = {serialize(c, rename)}" for i, c in enumerate(self.chis)]
        lines.append(f"interval = {self.interval}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.to_document()


@dataclass(frozen=True)
class GaugeMatrix:
    mu: tuple
    nu: tuple | None = None

    def __post_init__(self):
        mu = tuple(tuple(Fraction(v) for v in row) for row in self.mu)
        n = len(mu)
        if n == 0 or any(len(row) != n for row in mu):
            raise LinodeError("gauge matrix must be square", code="shape")
        if determinant(mu) == 0:
            raise LinodeError("gauge matrix is singular", code="singular-matrix")
        object.__setattr__(self, "mu", mu)
        if self.nu is not None:
            nu = tuple(Fraction(v) for v in self.nu)
            if len(nu) != n:
                raise LinodeError("shift vector length must match the matrix", code="shape")
            object.__setattr__(self, "nu", nu)

    @property
    def size(self) -> int:
        return len(self.mu)

    @classmethod
    def identity(cls, n: int) -> "GaugeMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def determinant(rows) -> Fraction:
    """Exact determinant of a rational matrix by Gaussian elimination."""
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                for j in range(c, n):
                    m[i][j] -= f * m[c][j]
    return det


# ---------------------------------------------------------------------------
# symbolic determinants

def _cofactor_det(matrix, rows: tuple, memo: dict) -> Expr:
    """det of matrix[rows][0..len(rows)-1], expanded along the last used column."""
    if rows in memo:
        return memo[rows]
    k = len(rows)
    if k == 1:
        out = matrix[rows[0]][0]
    else:
        col = k - 1
        terms = []
        for pos, i in enumerate(rows):
            entry = matrix[i][col]
            if entry.is_zero():
                continue
            minor = _cofactor_det(matrix, rows[:pos] + rows[pos + 1:], memo)
            sign = 1 if (pos + col) % 2 == 0 else -1
            terms.append(mul(const(sign), entry, minor))
        out = add(*terms)
    memo[rows] = out
    return out


def minors(fs: FundamentalSystem):
    """M_m for m = 0..r: determinant of the derivative matrix without row m."""
    r = fs.order
    matrix = fs.derivative_matrix(r + 1)
    memo = {}
    full = tuple(range(r + 1))
    return [_cofactor_det(matrix, full[:m] + full[m + 1:], memo) for m in range(r + 1)]


def wronskian(fs: FundamentalSystem) -> Expr:
    r = fs.order
    return _cofactor_det(fs.derivative_matrix(), tuple(range(r)), {})


def check_wronskian(fs: FundamentalSystem, W: Expr | None = None, n: int = WRONSKIAN_SAMPLES):
    """Raise WronskianError unless W stays away from 0 on the interval.

    The test is relative to Hadamard's bound (product of column norms of the
    derivative matrix) at each sample.
    """
    W = wronskian(fs) if W is None else W
    if W.is_zero():
        raise WronskianError("Wronskian vanishes identically (dependent functions)")
    matrix = fs.derivative_matrix()
    entries = [e for row in matrix for e in row]
    try:
        ts, vals = sample([W] + entries, fs.interval, n)
    except EvaluationError as err:
        raise WronskianError(f"Wronskian not evaluable: {err}") from err
    r = fs.order
    w = vals[0]
    block = np.asarray(vals[1:]).reshape(r, r, -1)
    bound = np.prod(np.sqrt(np.sum(block ** 2, axis=0)), axis=0)
    bad = np.abs(w) <= WRONSKIAN_FLOOR * np.maximum(bound, 1e-300)
    if np.any(bad) or not (np.all(w > 0) or np.all(w < 0)):
        where = ts[np.argmax(bad)] if np.any(bad) else ts[int(np.argmin(np.abs(w)))]
        raise WronskianError(f"Wronskian vanishes near t = {float(where)!r}")
    return W


def coefficients_from_fundamental_system(fs: FundamentalSystem, check: bool = True) -> LinearODE:
    """The monic homogeneous equation with solution basis fs."""
    r = fs.order
    if r < 2:
        raise LinodeError("recovery needs at least two functions", code="order")
    M = minors(fs)
    W = M[r]
    if check:
        check_wronskian(fs, W)
    inv = power(W, -1)
    coeffs = [mul(const((-1) ** (r + m)), M[m], inv) for m in range(r)]
    return LinearODE(tuple(coeffs), ZERO, fs.interval)


def fundamental_system(ode: LinearODE, t0: float, tol: float = DEFAULT_TOL) -> FundamentalSystem:
    """chi_i with initial jet e_i at t0 (so W(t0) = 1)."""
    r = ode.order
    inits = [[float(i == j) for j in range(r)] for i in range(r)]
    sols = solve_linear_ivps(ode.homogeneous_part(), t0, inits, tol, prefix="chi")
    return FundamentalSystem(tuple(s.solution for s in sols), sols[0].interval)


def apply_gauge(fs: FundamentalSystem, g: GaugeMatrix) -> FundamentalSystem:
    """chi~_i = sum_j mu_ij chi_j."""
    if g.size != fs.order:
        raise LinodeError(f"gauge matrix size {g.size} does not match order {fs.order}", code="shape")
    chis = []
    for row in g.mu:
        chis.append(add(*[mul(const(c), chi) for c, chi in zip(row, fs.chis) if c != 0]))
    return FundamentalSystem(tuple(chis), fs.interval)


def combination(fs: FundamentalSystem, coeffs) -> Expr:
    return add(*[mul(const(Fraction(c)), chi) for c, chi in zip(coeffs, fs.chis) if c != 0])


# ---------------------------------------------------------------------------
# subclass constraints and transformation components

def satisfies(fs: FundamentalSystem, tag, tol: float = 1e-9, n: int = WRONSKIAN_SAMPLES) -> bool:
    """Whether fs meets the constraints singling out the class.

    L1: M_{r-1} = 0; L2: also M_{r-2} = 0; A1: chi_1 = 1; A2: also chi_2 = t;
    L: always (all these together with W != 0).
    """
    tag = ClassTag.parse(tag) if isinstance(tag, str) else tag
    r = fs.order
    if tag in (ClassTag.L, ClassTag.HOMOGENEOUS):
        return True
    if tag in (ClassTag.L1, ClassTag.L2):
        M = minors(fs)
        rows = [r - 1] if tag is ClassTag.L1 else [r - 1, r - 2]
        _, vals = sample([M[r]] + [M[m] for m in rows], fs.interval, n)
        scale = 1.0 + np.abs(vals[0])
        return all(bool(np.max(np.abs(v) / scale) <= tol) for v in vals[1:])
    wanted = [ONE] if tag is ClassTag.A1 else [ONE, T]
    if r < len(wanted):
        return False
    _, vals = sample([sub(chi, w) for chi, w in zip(fs.chis, wanted)], fs.interval, n)
    return all(bool(np.max(np.abs(v)) <= tol) for v in vals)


def transformed_rhs(fs: FundamentalSystem, tau: PointTransformation, b, shift) -> Expr:
    """b~ as a function of the source variable for x~ = X1 (x + shift):

    b~ = X1 / T_t^r * (b + W(chi, shift) / W(chi)).
    """
    r = fs.order
    bordered = FundamentalSystem(fs.chis + (as_expr(shift),), fs.interval)
    ratio = mul(wronskian(bordered), power(wronskian(fs), -1))
    return mul(tau.X1, power(tau.T_t, -r), add(as_expr(b), ratio))


def arnold_transformation(fs: FundamentalSystem, g: GaugeMatrix, tag, shift=ZERO,
                          T_map: Expr | None = None) -> PointTransformation:
    """The transformation x~ = (x + shift)/(mu_1k chi_k) of the Arnold classes.

    For A2 the new variable is t~ = mu_2j chi_j / mu_1k chi_k; for A1 it is
    T_map (default t).
    """
    tag = ClassTag.parse(tag) if isinstance(tag, str) else tag
    if tag not in (ClassTag.A1, ClassTag.A2):
        raise LinodeError(f"no Arnold transformation for class {tag}", code="class")
    psi1 = combination(fs, g.mu[0])
    inv = power(psi1, -1)
    if tag is ClassTag.A2:
        Tf = mul(combination(fs, g.mu[1]), inv)
    else:
        Tf = T if T_map is None else as_expr(T_map)
    return PointTransformation(Tf, inv, mul(as_expr(shift), inv), fs.interval)
