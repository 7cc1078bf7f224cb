import math

import numpy as np
import pytest

import cases
from singsym.errors import SingularSubmatrix
from singsym.fields import ScalarField
from singsym.geometry import DomainSpec, build_grid
from singsym.nonlinearity import FSpec, NonlinearitySpec
from singsym.poincare import J01, delta_from_lipschitz, estimate_delta, poincare_constant


def test_1d_matches_tridiagonal_eigenvalue():
    h = 1 / 128
    g = build_grid(DomainSpec.interval(0.0, 1.0), h)
    lam = 4 / h**2 * math.sin(math.pi * h / 2) ** 2
    assert poincare_constant(g, tol=1e-12) == pytest.approx(1 / lam, rel=1e-6)


def test_unit_square_close_to_continuum():
    g = build_grid(DomainSpec.rectangle(0, 1, 0, 1), 1 / 64)
    assert poincare_constant(g) == pytest.approx(1 / (2 * math.pi**2), rel=0.01)


def test_restriction_does_not_increase_constant():
    g = build_grid(DomainSpec.rectangle(0, 1, 0, 1), 1 / 32)
    full = poincare_constant(g)
    half = g.coords[:, 0] < 0.5
    assert poincare_constant(g, half) <= full


def test_subset_errors():
    g = build_grid(DomainSpec.interval(0, 1), 1 / 16)
    with pytest.raises(SingularSubmatrix):
        poincare_constant(g, np.zeros(g.size, dtype=bool))
    with pytest.raises(SingularSubmatrix):
        poincare_constant(g, [0, 1, 5, 6])


def test_delta_closed_forms():
    assert delta_from_lipschitz(100, 2) == pytest.approx(math.pi * 2.40483**2 / 200, abs=1e-4)
    assert delta_from_lipschitz(100, 2) == pytest.approx(0.0908, abs=1e-4)
    assert delta_from_lipschitz(1, 1) == pytest.approx(math.pi / math.sqrt(2), abs=1e-12)
    assert math.isinf(delta_from_lipschitz(0, 2))
    assert J01 == pytest.approx(2.404825557695773)


def test_estimate_delta_zero_f_is_infinite():
    z, _ = cases.u0("interval", 1.0)
    est = estimate_delta(z, NonlinearitySpec(1.0))
    assert math.isinf(est.delta) and est.to_dict()["delta"] == "inf"


def test_direct_eigen_agrees_with_faber_krahn():
    # at delta the ball has C * C_p = 1/2, so both rules land near the same measure
    g = build_grid(DomainSpec.interval(-1, 1), 1 / 32)
    u = ScalarField(g, 1 - g.coords[:, 0] ** 2)
    spec = NonlinearitySpec(1.0, FSpec.linear(3.0))
    a = estimate_delta(u, spec)
    b = estimate_delta(u, spec, rule="direct_eigen")
    assert a.lipschitz_C == pytest.approx(3.0)
    assert b.delta == pytest.approx(a.delta, rel=0.02)
