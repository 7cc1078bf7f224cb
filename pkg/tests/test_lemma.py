from hypothesis import given, strategies as st
import numpy as np
import pytest

from singsym.errors import NonPositiveX
from singsym.lemma import (
    QuadrupleSample,
    bracket,
    check_bracket_nonpositive,
    check_factorization_identity,
    check_g_nonpositive,
    check_g_tilde_monotone,
    dg_dy,
    g_gamma,
    g_gamma_terms,
    g_tilde,
    sample_domain,
)

pos = st.floats(1e-3, 1e3)
gammas = st.floats(0.1, 6)


def test_g_gamma_examples():
    assert g_gamma(QuadrupleSample(1, 1, 2, 0, 1)) == -4
    assert g_gamma(0, 1, 1, 1, 1) == -2
    assert g_gamma(2, 1, 1, 1, 1) == 4  # outside D: z < x


@given(pos, pos, gammas)
def test_g_gamma_vanishes_on_diagonal(x, y, gamma):
    assert g_gamma(x, y, x, y, gamma) == 0.0


@given(pos, pos, pos, pos, gammas)
def test_g_gamma_nonpositive_property(a, b, c, d, gamma):
    x, z = sorted((a, c))
    h, y = sorted((b, d))
    scale = max(abs(t) for t in g_gamma_terms(x, y, z, h, gamma))
    assert g_gamma(x, y, z, h, gamma) <= 1e-12 * scale


def test_g_nonpositive_bulk():
    out = check_g_nonpositive([0.5, 1, 2, 3, 5], 1_000_000, seed=0)
    assert all(v.passed for v in out)
    assert all(v.samples == 1_000_000 for v in out)


def test_flipped_domain_finds_counterexample():
    (v,) = check_g_nonpositive([1.0], 10_000, seed=0, flip=True)
    assert not v.passed and v.worst_value > 0
    x, y, z, h = v.worst_point
    assert z < x and g_gamma(x, y, z, h, 1.0) > 0


def test_boundary_sample_exact_zero_accepted():
    (v,) = check_bracket_nonpositive([2.0], samples=([1.5], [1.5], [0.3], [0.3]))
    assert v.passed and v.worst_value == 0.0


def test_sampling_is_seeded_and_in_domain():
    a = sample_domain(np.random.default_rng(3), 1000)
    b = sample_domain(np.random.default_rng(3), 1000)
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p, q)
    x, y, z, h = a
    assert np.all(x <= z) and np.all(h <= y) and np.all(x >= 1e-3) and np.all(y <= 1e3)


@given(pos, pos, pos, pos, gammas)
def test_dg_dy_matches_central_difference(a, b, c, d, gamma):
    x, z = sorted((a, c))
    h, y = sorted((b, d))
    step = 1e-5 * y
    fd = (g_gamma(x, y + step, z, h, gamma) - g_gamma(x, y - step, z, h, gamma)) / (2 * step)
    an = dg_dy(x, y, z, h, gamma)
    assert an <= 0
    # cancellation error of the difference quotient is set by the size of the terms
    scale = gamma * (x + y) ** (gamma - 1) * (x**gamma + z**gamma) * (z + h) ** gamma
    assert abs(fd - an) <= 1e-6 * max(abs(an), 1e-6 * scale) + 1e-9 * scale


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), gammas)
def test_g_tilde_zero_at_origin_and_on_diagonal(a, b, gamma):
    x, z = sorted((a, b))
    assert g_tilde(0.0, x, z, gamma) == 0.0
    assert g_tilde(np.array([0.0, 1.0, 100.0]), x, x, gamma).tolist() == [0.0, 0.0, 0.0]


def test_g_tilde_value_and_error():
    assert g_tilde(1.0, 1.0, 2.0, 1.0) == pytest.approx(1 - 0.5 + 1 / 3 - 0.5)
    with pytest.raises(NonPositiveX):
        g_tilde(1.0, 0.0, 1.0, 1.0)


def test_g_tilde_monotone_suite():
    assert all(v.passed for v in check_g_tilde_monotone([0.5, 1, 2, 3, 5], 10_000, seed=0))


def test_factorization_identity():
    out = check_factorization_identity([0.5, 1, 2, 3], 100_000, seed=0)
    assert all(v.passed and v.worst_value <= 1e-10 for v in out)


def test_bracket_examples():
    assert bracket(1.0, 1.0, 0.7, 0.7, 2.0) == 0.0
    assert bracket(1.0, 2.0, 1.0, 0.0, 1.0) == pytest.approx(-0.5)


def test_bracket_bulk_agrees_in_sign_with_g():
    assert all(v.passed for v in check_bracket_nonpositive([0.5, 1, 2, 3, 5], 1_000_000, seed=0))


def test_verdict_json_keys():
    (v,) = check_g_nonpositive([1.0], 100, seed=1)
    assert set(v.to_dict()) == {"gamma", "samples", "worst_value", "worst_point", "pass"}
