"""Discrete -Laplacian, linear solves, and the regularized Newton continuation
that produces u_n, u0, u and w = u - u0.

The operator is the 3-/5-point stencil with Shortley-Weller arms at nodes next
to a curved boundary; the Dirichlet value 0 is folded in, so every row is
"-Delta_h v" for the field extended by zero.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import logging
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateCutCell,
    GridMismatch,
    NewtonStalled,
    NoConvergence,
    NonPositiveField,
)
from .fields import ScalarField
from .nonlinearity import NonlinearitySpec, eval_f, eval_f_derivative

__all__ = [
    "LaplacianOperator",
    "StageRecord",
    "SolveTrace",
    "DEFAULT_SCHEDULE",
    "assemble_laplacian",
    "solve_linear",
    "solve_regularized",
    "solve_u0",
    "solve_full",
    "decompose",
    "interior_residual",
    "h1_seminorm",
]

log = logging.getLogger(__name__)

DEFAULT_SCHEDULE = tuple(2**k for k in range(15))
MIN_CUT_FRACTION = 1e-6
MAX_HALVINGS = 30


@dataclass(frozen=True, eq=False)
class LaplacianOperator:
    grid: object
    matrix: sp.csr_matrix
    symmetric: bool

    def apply(self, values):
        return self.matrix @ np.asarray(values, dtype=float)

    def __matmul__(self, values):
        return self.apply(values)

    @property
    def diagonal(self):
        return self.matrix.diagonal()


@lru_cache(maxsize=16)
def assemble_laplacian(grid):
    if np.any(grid.arms < MIN_CUT_FRACTION):
        bad = np.argwhere(grid.arms < MIN_CUT_FRACTION)[0]
        raise DegenerateCutCell(
            f"node {grid.index[bad[0]].tolist()} is within {grid.arms[tuple(bad)]:.2e}h of the boundary"
        )
    h = grid.h
    m = grid.size
    diag = np.zeros(m)
    rows, cols, vals = [], [], []
    for d in range(grid.dim):
        hm = grid.arms[:, 2 * d] * h
        hp = grid.arms[:, 2 * d + 1] * h
        diag += 2.0 / (hm * hp)
        for nb, coef in (
            (grid.neighbors[:, 2 * d], -2.0 / (hm * (hm + hp))),
            (grid.neighbors[:, 2 * d + 1], -2.0 / (hp * (hm + hp))),
        ):
            ok = nb >= 0
            rows.append(np.flatnonzero(ok))
            cols.append(nb[ok])
            vals.append(coef[ok])
    rows.append(np.arange(m))
    cols.append(np.arange(m))
    vals.append(diag)
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    )
    A.sort_indices()
    return LaplacianOperator(grid, A, bool(np.all(grid.arms == 1.0)))


def _values(x):
    return x.values if isinstance(x, ScalarField) else np.asarray(x, dtype=float)


def solve_linear(op, rhs, tol=1e-10, maxiter=None, method="auto"):
    """Solve -Delta_h v = rhs.

    Jacobi-preconditioned CG for symmetric operators, BiCGStab once cut
    cells make the stencil non-symmetric, or ``method="direct"`` for sparse
    LU.  Guarantees sup|residual| <= tol * (1 + sup|rhs|).
    """
    b = _values(rhs)
    bound = tol * (1.0 + float(np.max(np.abs(b), initial=0.0)))
    if method == "auto":
        method = "cg" if op.symmetric else "bicgstab"
    if method == "direct":
        x = spla.splu(op.matrix.tocsc()).solve(b)
    else:
        dinv = 1.0 / op.diagonal
        M = spla.LinearOperator(op.matrix.shape, matvec=lambda r: dinv * r)
        solver = spla.cg if method == "cg" else spla.bicgstab
        maxiter = maxiter or 20 * op.grid.size
        # the 2-norm stop also bounds the sup norm
        x, info = solver(op.matrix, b, x0=np.zeros_like(b), rtol=0.0, atol=bound, maxiter=maxiter, M=M)
        if info != 0:
            raise NoConvergence(f"{method} did not converge in {maxiter} iterations")
    res = float(np.max(np.abs(op.matrix @ x - b), initial=0.0))
    if res > bound:
        raise NoConvergence(f"{method} residual {res:.3e} above {bound:.3e}")
    out = ScalarField(op.grid, x)
    return out


@dataclass
class StageRecord:
    n: float
    residual: float
    iterations: int
    damping_events: int
    min_increment: float = None
    max_change: float = None

    def to_dict(self):
        return {
            "n": "inf" if math.isinf(self.n) else int(self.n),
            "residual": self.residual,
            "iterations": self.iterations,
            "damping_events": self.damping_events,
            "min_increment": self.min_increment,
            "max_change": self.max_change,
        }


@dataclass
class SolveTrace:
    stages: list = field(default_factory=list)
    converged_early: bool = False

    @property
    def min_increment(self):
        incs = [s.min_increment for s in self.stages if s.min_increment is not None]
        return min(incs) if incs else None

    def to_dict(self):
        return {
            "schema": "v1",
            "converged_early": self.converged_early,
            "stages": [s.to_dict() for s in self.stages],
        }


def _source(spec, n, include_f):
    """Right-hand side g(v) and its derivative; n = inf is the singular term."""
    gamma = spec.gamma
    shift = 0.0 if math.isinf(n) else 1.0 / n

    def g(v):
        out = (v + shift) ** -gamma
        if include_f:
            out = out + eval_f(v, spec)
        return out

    def dg(v):
        out = -gamma * (v + shift) ** (-gamma - 1.0)
        if include_f:
            out = out + eval_f_derivative(v, spec)
        return out

    return g, dg


def _newton(op, g, dg, v, tol, strict, max_iter=100):
    """Damped Newton for A v = g(v).

    The merit is the nodewise residual scaled by the magnitude of the terms it
    balances.  A step is accepted only if the merit drops and the iterate stays
    in the admissible cone (v >= 0, or v > 0 for the singular problem);
    otherwise it is halved.
    """
    A = op.matrix
    absA = abs(A)

    def merit(v):
        gv = g(v)
        F = A @ v - gv
        scale = 1.0 + np.abs(gv) + absA @ np.abs(v)
        return F, float(np.max(np.abs(F) / scale, initial=0.0))

    def admissible(v):
        return bool(np.all(v > 0)) if strict else bool(np.all(v >= 0))

    F, r = merit(v)
    damping = 0
    for it in range(1, max_iter + 1):
        J = (A - sp.diags(dg(v))).tocsc()
        step = spla.splu(J).solve(-F)
        small = np.max(np.abs(step)) <= tol * (1.0 + np.max(np.abs(v)))
        if r <= tol and small:
            trial = v + step
            if admissible(trial):
                Ft, rt = merit(trial)
                if rt <= r:
                    return trial, rt, it, damping
            return v, r, it - 1, damping
        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = v + alpha * step
            if admissible(trial):
                Ft, rt = merit(trial)
                if rt < r:
                    break
            alpha *= 0.5
            damping += 1
        else:
            raise NewtonStalled(f"damping exhausted at residual {r:.3e} after {it} iterations")
        v, F, r = trial, Ft, rt
    raise NewtonStalled(f"no convergence in {max_iter} Newton iterations (residual {r:.3e})")


def _stage(grid, spec, n, init, tol, include_f):
    op = assemble_laplacian(grid)
    g, dg = _source(spec, n, include_f)
    v0 = np.array(_values(init), dtype=float)
    if v0.shape == ():
        v0 = np.full(grid.size, float(v0))
    strict = math.isinf(n)
    v, r, its, damping = _newton(op, g, dg, v0, tol, strict)
    return v, StageRecord(float(n), r, its, damping)


def solve_regularized(grid, spec, n, init=0.0, tol=1e-10):
    """Solve -Delta_h v = (v + 1/n)^-gamma + f(v) with v >= 0.

    ``n = math.inf`` solves the singular problem itself (v > 0 required).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    init_v = _values(init)
    if np.any(init_v < 0):
        raise ValueError("initial guess must be non-negative")
    v, _ = _stage(grid, spec, n, init, tol, include_f=not spec.f.is_zero)
    return ScalarField(grid, v)


def _continuation(grid, spec, schedule, tol, init, newton_tol, polish, include_f):
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    trace = SolveTrace()
    v = _values(init)
    prev = None
    for n in schedule:
        v, rec = _stage(grid, spec, n, v, newton_tol, include_f)
        if prev is not None:
            rec.min_increment = float(np.min(v - prev))
            rec.max_change = float(np.max(np.abs(v - prev)))
        trace.stages.append(rec)
        log.debug("stage n=%s residual=%.2e iterations=%d", n, rec.residual, rec.iterations)
        if rec.max_change is not None and rec.max_change <= tol:
            trace.converged_early = True
            break
        prev = v
    if polish:
        last = v
        v, rec = _stage(grid, spec, math.inf, v, newton_tol, include_f)
        rec.min_increment = float(np.min(v - last))
        rec.max_change = float(np.max(np.abs(v - last)))
        trace.stages.append(rec)
    return ScalarField(grid, v), trace


def solve_u0(grid, gamma, schedule=DEFAULT_SCHEDULE, tol=1e-8, init=0.0, newton_tol=1e-10, polish=True):
    """u0 as the limit of the increasing regularized sequence u_n.

    Warm-started along ``schedule``; stops early once consecutive stages
    differ by at most ``tol`` in sup norm.  With ``polish`` a final stage
    solves the unregularized discrete problem from the last u_n.
    Returns ``(u0, trace)``.
    """
    spec = gamma if isinstance(gamma, NonlinearitySpec) else NonlinearitySpec(float(gamma))
    return _continuation(grid, spec.without_f(), schedule, tol, init, newton_tol, polish, False)


def solve_full(grid, spec, schedule=DEFAULT_SCHEDULE, tol=1e-8, init=None, newton_tol=1e-10, polish=True):
    """u for -Delta u = u^-gamma + f(u) by the same continuation with f included.

    The default start is the n = schedule[0] solution of the f = 0 problem,
    which is positive inside, so f'(0) = inf (s^q with q < 1) is never hit.
    Returns ``(u, trace)``.
    """
    if init is None:
        init = _values(solve_regularized(grid, spec.without_f(), schedule[0], 0.0, newton_tol))
    return _continuation(
        grid, spec, schedule, tol, init, newton_tol, polish, include_f=not spec.f.is_zero
    )


def decompose(u, u0):
    """w = u - u0 nodewise."""
    if not u.grid.same_as(u0.grid):
        raise GridMismatch("u and u0 live on different grids")
    return ScalarField(u.grid, u.values - u0.values)


def interior_residual(field, spec, grid=None):
    """-Delta_h u - u^-gamma - f(u) at every node."""
    grid = grid or field.grid
    v = _values(field)
    if np.any(v <= 0):
        raise NonPositiveField("residual of the singular equation needs a positive field")
    op = assemble_laplacian(grid)
    return ScalarField(grid, op @ v - v ** -spec.gamma - eval_f(v, spec))


def h1_seminorm(field, grid=None):
    """sqrt(sum of squared one-sided differences * h^N), zero boundary values.

    Every lattice edge between two nodes counts once; an arm reaching the
    boundary contributes (v - 0) / (theta h).
    """
    grid = grid or field.grid
    v = _values(field)
    total = 0.0
    for d in range(grid.dim):
        lo, hi = grid.neighbors[:, 2 * d], grid.neighbors[:, 2 * d + 1]
        ok = hi >= 0
        total += np.sum(((v[hi[ok]] - v[ok]) / grid.h) ** 2)
        for nb, col in ((lo, 2 * d), (hi, 2 * d + 1)):
            cut = nb < 0
            total += np.sum((v[cut] / (grid.arms[cut, col] * grid.h)) ** 2)
    return math.sqrt(total * grid.measure_per_node)
