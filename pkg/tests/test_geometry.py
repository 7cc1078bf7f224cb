import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from singsym.errors import AsymmetricGrid, EmptyCap, SpacingTooCoarse
from singsym.geometry import (
    Direction,
    DomainSpec,
    a_of_nu,
    build_grid,
    cap_section,
    interpolate,
    lambda1_of_nu,
    reflect_point,
)

INTERVAL = DomainSpec.interval(-1.0, 1.0)
DISK = DomainSpec.disk((0.0, 0.0), 1.0)
TALL = DomainSpec.rectangle(-1.0, 1.0, -2.0, 2.0)
E1, E2 = Direction.axis(0), Direction.axis(1)


def test_interval_node_count():
    g = build_grid(INTERVAL, 0.25)
    assert g.size == 7
    np.testing.assert_allclose(g.coords[:, 0], np.arange(-0.75, 0.76, 0.25), atol=1e-15)


def test_rectangle_node_count():
    g = build_grid(TALL, 2.0**-5)
    assert g.size == 63 * 127
    assert len(np.unique(g.coords[:, 0])) == 63
    assert len(np.unique(g.coords[:, 1])) == 127


def test_disk_symmetric_under_x_flip():
    # h = 0.5 leaves fewer than 7 nodes across, so use 0.25 for the same property
    g = build_grid(DISK, 0.25)
    perm = g.reflection_permutation(E1)
    assert perm is not None
    np.testing.assert_allclose(g.coords[perm], g.coords * [-1, 1], atol=1e-15)


def test_disk_h_half_rejected_as_too_coarse():
    with pytest.raises(SpacingTooCoarse):
        build_grid(DISK, 0.5)


def test_off_centre_lattice_rejected():
    with pytest.raises(AsymmetricGrid):
        build_grid(DomainSpec.interval(-1.0, 1.0), 0.23)


def test_reflect_point_examples():
    np.testing.assert_allclose(reflect_point([0.1, 0.4], E1, 0.25), [0.4, 0.4], atol=1e-15)
    np.testing.assert_allclose(reflect_point([0.3, 0.5], E1, 0.0), [-0.3, 0.5], atol=1e-15)


def test_reflect_point_involution_bulk():
    rng = np.random.default_rng(7)
    n = 1_000_000
    x = rng.uniform(-2, 2, size=(n, 2))
    th = rng.uniform(0, 2 * np.pi)
    nu = Direction.of([math.cos(th), math.sin(th)])
    lam = rng.uniform(-1, 1)
    back = reflect_point(reflect_point(x, nu, lam), nu, lam)
    scale = np.maximum(1.0, np.abs(x))
    assert np.max(np.abs(back - x) / scale) <= 1e-14 * 16


@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi), st.floats(-2, 2)
)
def test_reflect_point_involution_property(x, y, th, lam):
    nu = Direction.of([math.cos(th), math.sin(th)], normalize=True)
    p = np.array([x, y])
    back = reflect_point(reflect_point(p, nu, lam), nu, lam)
    assert np.allclose(back, p, rtol=1e-14, atol=1e-14 * (1 + abs(lam)))


def test_a_of_nu():
    assert a_of_nu(DISK, E2) == pytest.approx(-1.0, abs=1e-15)
    assert a_of_nu(TALL, E1) == pytest.approx(-1.0, abs=1e-15)
    diag = Direction.of([1, 1], normalize=True)
    assert a_of_nu(TALL, diag) == pytest.approx(-3 / math.sqrt(2), abs=1e-14)


def test_lambda1_of_nu_symmetric_cases():
    for th in np.linspace(0, 2 * np.pi, 9):
        assert lambda1_of_nu(DISK, Direction.of([math.cos(th), math.sin(th)])) == pytest.approx(0, abs=1e-14)
    assert lambda1_of_nu(TALL, E1) == 0.0
    assert lambda1_of_nu(INTERVAL, Direction.of([1.0])) == 0.0


def test_lambda1_diagonal_rectangle_is_before_centre():
    diag = Direction.of([1, 1], normalize=True)
    l1 = lambda1_of_nu(TALL, diag)
    assert a_of_nu(TALL, diag) < l1 < 0


def test_cap_section_interval():
    g = build_grid(INTERVAL, 0.25)
    cap = cap_section(g, Direction.of([1.0]), -0.5)
    np.testing.assert_allclose(g.coords[cap.rows, 0], [-0.75])


def test_cap_below_a_is_empty():
    g = build_grid(INTERVAL, 0.25)
    with pytest.raises(EmptyCap):
        cap_section(g, Direction.of([1.0]), -0.9)


def test_cap_on_grid_line_reflects_onto_nodes():
    g = build_grid(DISK, 2.0**-4)
    cap = cap_section(g, E1, -0.25)
    assert cap.exact.all()
    w = cap.stencil_weights
    assert np.all((np.abs(w) < 1e-14) | (np.abs(w - 1) < 1e-14))


def test_cap_count_matches_brute_force():
    g = build_grid(DISK, 2.0**-6)
    h = g.h
    brute = sum(
        1
        for i in range(-70, 71)
        for j in range(-70, 71)
        if (i * h) ** 2 + (j * h) ** 2 < 1 - 1e-12 * h and i * h < -0.5
    )
    assert cap_section(g, E1, -0.5).size == brute


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.99, 0.0), st.floats(0.0, 0.5), st.floats(0, 2 * math.pi))
def test_cap_monotone_in_lambda(lam, dl, th):
    g = build_grid(DISK, 2.0**-4)
    nu = Direction.of([math.cos(th), math.sin(th)])
    try:
        small = set(cap_section(g, nu, lam).rows)
    except EmptyCap:
        small = set()
    try:
        big = set(cap_section(g, nu, min(lam + dl, 0.0)).rows)
    except EmptyCap:
        big = set()
    assert small <= big


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_reflected_cap_contained_up_to_lambda1(frac, th):
    for spec, h in ((DISK, 2.0**-4), (TALL, 2.0**-3)):
        g = build_grid(spec, h)
        nu = Direction.of([math.cos(th), math.sin(th)])
        a, l1 = a_of_nu(spec, nu), lambda1_of_nu(spec, nu)
        t = a + frac * (l1 - a)
        try:
            cap = cap_section(g, nu, t)
        except EmptyCap:
            continue
        assert np.all(spec.signed_distance(cap.targets) <= h * 1e-12)


def test_interpolate_linear_exact_and_zero_extension():
    g = build_grid(DomainSpec.rectangle(-1, 1, -1, 1), 0.125)
    vals = 0.3 + 2 * g.coords[:, 0] - g.coords[:, 1]
    pts = np.array([[0.01, 0.02], [-0.33, 0.71]])
    np.testing.assert_allclose(interpolate(g, vals, pts), 0.3 + 2 * pts[:, 0] - pts[:, 1], atol=1e-14)
    assert interpolate(g, np.ones(g.size), np.array([[1.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-14)


def test_domain_json_round_trip():
    for spec in (INTERVAL, DISK, TALL):
        assert DomainSpec.from_dict(spec.to_dict()) == spec
