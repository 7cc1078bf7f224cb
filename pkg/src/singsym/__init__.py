"""Finite-difference laboratory for -Lap u = u^-gamma + f(u) with zero
Dirichlet data: regularized Newton continuation, the split u = u0 + w, and
numerical moving-plane checks on symmetric convex domains."""

from .elliptic import (
    SolveTrace,
    assemble_laplacian,
    decompose,
    h1_seminorm,
    interior_residual,
    solve_full,
    solve_linear,
    solve_regularized,
    solve_u0,
)
from .fields import ScalarField, read_binary, read_csv, write_binary, write_csv
from .geometry import DomainSpec, Direction, Grid, a_of_nu, build_grid, lambda1_of_nu, reflect_point
from .nonlinearity import FSpec, NonlinearitySpec, check_hp
from .poincare import delta_from_lipschitz, estimate_delta, poincare_constant

__version__ = "0.1.0"
