"""Discrete Poincare constants and the small-domain threshold delta."""

from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla
from scipy.special import jn_zeros

from .elliptic import assemble_laplacian
from .errors import SingularSubmatrix
from .geometry import DomainSpec, build_grid
from .nonlinearity import check_hp

__all__ = ["DeltaEstimate", "poincare_constant", "delta_from_lipschitz", "estimate_delta"]

J01 = float(jn_zeros(0, 1)[0])


def _subset_rows(grid, subset):
    if subset is None:
        return np.arange(grid.size)
    subset = np.asarray(subset)
    if subset.dtype == bool:
        return np.flatnonzero(subset)
    return np.unique(subset.astype(np.int64))


def poincare_constant(grid, subset=None, tol=1e-8, maxiter=10_000):
    """1 / lambda_min of the Dirichlet -Delta_h restricted to ``subset``.

    Inverse power iteration with shift 0 from the all-ones vector.  Nodes of
    the grid outside the subset act as Dirichlet boundary.
    """
    rows = _subset_rows(grid, subset)
    if len(rows) == 0:
        raise SingularSubmatrix("empty node subset")
    A = assemble_laplacian(grid).matrix[rows][:, rows].tocsc()
    ncomp, _ = csgraph.connected_components(A, directed=False)
    if ncomp != 1:
        raise SingularSubmatrix(f"node subset has {ncomp} connected components")
    lu = spla.splu(A)
    x = np.ones(len(rows))
    x /= np.linalg.norm(x)
    mu = math.inf
    for _ in range(maxiter):
        y = lu.solve(x)
        mu_new = float(x @ y) / float(x @ x)
        x = y / np.linalg.norm(y)
        if abs(mu_new - mu) <= tol * abs(mu_new):
            return mu_new
        mu = mu_new
    return mu


@dataclass(frozen=True)
class DeltaEstimate:
    lipschitz_C: float
    poincare_bound_rule: str
    delta: float
    dim: int

    def to_dict(self):
        return {
            "schema": "v1",
            "lipschitz_C": self.lipschitz_C,
            "poincare_bound_rule": self.poincare_bound_rule,
            "delta": "inf" if math.isinf(self.delta) else self.delta,
            "dim": self.dim,
        }


def delta_from_lipschitz(C, dim):
    """Measure of the ball on which C * C_p = 1/2 (Faber-Krahn).

    C_p of a disk of area a is a / (pi j01^2); of an interval of length L it
    is (L / pi)^2.
    """
    if C <= 0:
        return math.inf
    if dim == 1:
        return math.pi / math.sqrt(2.0 * C)
    return math.pi * J01**2 / (2.0 * C)


def _direct_eigen_delta(C, dim, resolution=24):
    """Bisect the ball size on discrete eigenvalue solves (validation mode)."""

    def cp(size):
        if dim == 1:
            g = build_grid(DomainSpec.interval(-size / 2, size / 2), size / (2 * resolution))
        else:
            r = math.sqrt(size / math.pi)
            g = build_grid(DomainSpec.disk((0.0, 0.0), r), r / resolution)
        return poincare_constant(g)

    guess = delta_from_lipschitz(C, dim)
    lo, hi = 0.5 * guess, 2.0 * guess
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if C * cp(mid) <= 0.5:
            lo = mid
        else:
            hi = mid
    return lo


def estimate_delta(u, spec, grid=None, rule="faber_krahn_closed_form", samples=1000):
    """delta(u, f): C is the sampled Lipschitz constant of f on [0, sup u]."""
    grid = grid or u.grid
    s_max = max(float(np.max(u.values)), 1e-12)
    C = 0.0 if spec.f.is_zero else check_hp(spec, s_max, samples).lipschitz_estimate
    if C == 0.0:
        return DeltaEstimate(C, rule, math.inf, grid.dim)
    if rule == "faber_krahn_closed_form":
        delta = delta_from_lipschitz(C, grid.dim)
    elif rule == "direct_eigen":
        delta = _direct_eigen_delta(C, grid.dim)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return DeltaEstimate(C, rule, delta, grid.dim)
