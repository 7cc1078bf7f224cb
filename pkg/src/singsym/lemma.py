"""Scalar inequalities behind the comparison principles, with seeded
randomized checks.

g_gamma(x, y, z, h) = x^g (x+y)^g (z+h)^g + x^g z^g (z+h)^g
                      - z^g (x+y)^g (z+h)^g - x^g z^g (x+y)^g
is <= 0 on D = {0 <= x <= z, 0 <= h <= y}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveX

__all__ = [
    "QuadrupleSample",
    "LemmaVerdict",
    "g_gamma",
    "g_gamma_terms",
    "dg_dy",
    "g_tilde",
    "bracket",
    "sample_domain",
    "check_g_nonpositive",
    "check_g_tilde_monotone",
    "check_factorization_identity",
    "check_bracket_nonpositive",
]

LOG_LO, LOG_HI = -3.0, 3.0
SHARD = 250_000


@dataclass(frozen=True)
class QuadrupleSample:
    x: float
    y: float
    z: float
    h: float
    gamma: float

    @property
    def in_domain(self):
        return 0 <= self.x <= self.z and 0 <= self.h <= self.y


@dataclass
class LemmaVerdict:
    gamma: float
    samples: int
    worst_value: float
    worst_point: list
    passed: bool

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "samples": self.samples,
            "worst_value": self.worst_value,
            "worst_point": self.worst_point,
            "pass": self.passed,
        }


def g_gamma_terms(x, y, z, h, gamma):
    """The four signed terms of g_gamma; each base power is computed once."""
    X = np.power(x, gamma)
    Z = np.power(z, gamma)
    XY = np.power(np.add(x, y), gamma)
    ZH = np.power(np.add(z, h), gamma)
    return X * XY * ZH, X * Z * ZH, -Z * XY * ZH, -X * Z * XY


def g_gamma(x, y=None, z=None, h=None, gamma=None):
    """g_gamma at (x, y, z, h), or at a single QuadrupleSample."""
    if isinstance(x, QuadrupleSample):
        x, y, z, h, gamma = x.x, x.y, x.z, x.h, x.gamma
    a, b, c, d = g_gamma_terms(x, y, z, h, gamma)
    return (a + b) + (c + d)


def _scale(x, y, z, h, gamma):
    return np.max(np.abs(np.stack(g_gamma_terms(x, y, z, h, gamma))), axis=0)


def dg_dy(x, y, z, h, gamma):
    """Analytic partial derivative of g_gamma in y."""
    XY1 = np.power(np.add(x, y), gamma - 1.0)
    X, Z, ZH = np.power(x, gamma), np.power(z, gamma), np.power(np.add(z, h), gamma)
    return gamma * XY1 * (X * ZH - Z * ZH - X * Z)


def g_tilde(t, x, z, gamma):
    """x^-g - z^-g + (z+t)^-g - (x+t)^-g for 0 < x <= z, t >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveX("g_tilde needs x > 0")
    z = np.asarray(z, dtype=float)
    # a^-g - (a+t)^-g = -a^-g expm1(-g log1p(t/a)): exact zero at t = 0, no cancellation
    dx = -(x**-gamma) * np.expm1(-gamma * np.log1p(t / x))
    dz = -(z**-gamma) * np.expm1(-gamma * np.log1p(t / z))
    return dx - dz


def bracket(u0, u0_lam, w, w_lam, gamma):
    """u0_lam^-g - u0^-g + (u0+w)^-g - (u0_lam+w_lam)^-g."""
    return (np.power(u0_lam, -gamma) - np.power(u0, -gamma)) + (
        np.add(u0, w) ** -gamma - np.add(u0_lam, w_lam) ** -gamma
    )


def _shards(sample_count, seed):
    n_shards = max(1, -(-sample_count // SHARD))
    seqs = np.random.SeedSequence(seed).spawn(n_shards)
    for k, ss in enumerate(seqs):
        size = min(SHARD, sample_count - k * SHARD)
        yield np.random.default_rng(ss), size


def sample_domain(rng, size, flip=False):
    """Log-uniform components in [1e-3, 1e3], ordered into D.

    With ``flip`` the x <= z constraint is reversed (outside D).
    """
    raw = 10.0 ** rng.uniform(LOG_LO, LOG_HI, size=(4, size))
    a, b = np.minimum(raw[0], raw[2]), np.maximum(raw[0], raw[2])
    h, y = np.minimum(raw[1], raw[3]), np.maximum(raw[1], raw[3])
    x, z = (b, a) if flip else (a, b)
    return x, y, z, h


def _verdict(gamma, count, rel, pts, tol):
    k = int(np.argmax(rel))
    return LemmaVerdict(
        float(gamma), int(count), float(rel[k]), [float(p[k]) for p in pts], bool(rel[k] <= tol)
    )


def check_g_nonpositive(gammas, sample_count=1_000_000, seed=0, rel_tol=1e-12, flip=False):
    """g_gamma / (largest |term|) <= rel_tol on seeded samples of D, per gamma."""
    out = []
    for gi, gamma in enumerate(gammas):
        best = None
        for rng, size in _shards(sample_count, [seed, gi]):
            x, y, z, h = sample_domain(rng, size, flip)
            rel = g_gamma(x, y, z, h, gamma) / _scale(x, y, z, h, gamma)
            v = _verdict(gamma, size, rel, (x, y, z, h), rel_tol)
            if best is None or v.worst_value > best.worst_value:
                best = v
        best.samples = sample_count
        best.passed = best.worst_value <= rel_tol
        out.append(best)
    return out


def check_factorization_identity(gammas, sample_count=100_000, seed=0, rel_tol=1e-10):
    """g(x,y,z,y) against -(x^-g - z^-g + (z+y)^-g - (x+y)^-g) (x z (z+y) (x+y))^g.

    The gap is measured relative to the largest term of g.
    """
    out = []
    for gi, gamma in enumerate(gammas):
        best = None
        for rng, size in _shards(sample_count, [seed, gi, 1]):
            x, y, z, _ = sample_domain(rng, size)
            lhs = g_gamma(x, y, z, y, gamma)
            rhs = -g_tilde(y, x, z, gamma) * np.power(x * z * (z + y) * (x + y), gamma)
            gap = np.abs(lhs - rhs) / _scale(x, y, z, y, gamma)
            v = _verdict(gamma, size, gap, (x, y, z), rel_tol)
            if best is None or v.worst_value > best.worst_value:
                best = v
        best.samples = sample_count
        best.passed = best.worst_value <= rel_tol
        out.append(best)
    return out


def check_g_tilde_monotone(gammas, sample_count=10_000, seed=0, t_points=64, rel_tol=1e-12):
    """g_tilde(0) = 0, derivative sign, and non-negative adjacent differences.

    ``worst_value`` is the most negative adjacent difference relative to
    x^-gamma (negated, so <= rel_tol passes); the derivative and t = 0 checks
    fold into ``passed``.
    """
    out = []
    t = np.concatenate([[0.0], np.logspace(LOG_LO - 1, LOG_HI + 1, t_points - 1)])
    for gi, gamma in enumerate(gammas):
        rng = np.random.default_rng(np.random.SeedSequence([seed, gi, 2]))
        x, _, z, _ = sample_domain(rng, sample_count)
        vals = g_tilde(t[None, :], x[:, None], z[:, None], gamma)
        scale = x[:, None] ** -gamma
        drops = -np.diff(vals, axis=1) / scale
        deriv = gamma * ((x[:, None] + t) ** (-gamma - 1) - (z[:, None] + t) ** (-gamma - 1))
        k = np.unravel_index(np.argmax(drops), drops.shape)
        worst = float(drops[k])
        ok = worst <= rel_tol and bool(np.all(vals[:, 0] == 0.0)) and bool(np.all(deriv >= 0))
        out.append(
            LemmaVerdict(float(gamma), sample_count, worst, [float(x[k[0]]), float(z[k[0]]), float(t[k[1]])], ok)
        )
    return out


def sample_admissible(rng, size):
    """(u0, u0_lam, w, w_lam) with 0 < u0 <= u0_lam and w >= w_lam >= 0."""
    x, y, z, h = sample_domain(rng, size)
    return x, z, y, h


def check_bracket_nonpositive(gammas, sample_count=1_000_000, seed=0, rel_tol=1e-12, samples=None):
    """bracket <= rel_tol * u0^-gamma on admissible samples, cross-checked in
    sign against g_gamma at x=u0, y=w, z=u0_lam, h=w_lam.

    ``samples`` may supply explicit (u0, u0_lam, w, w_lam) arrays instead.
    """
    out = []
    for gi, gamma in enumerate(gammas):
        if samples is not None:
            batches = [tuple(np.asarray(a, dtype=float) for a in samples)]
        else:
            batches = [sample_admissible(rng, size) for rng, size in _shards(sample_count, [seed, gi, 3])]
        best = None
        for u0, u0l, w, wl in batches:
            br = bracket(u0, u0l, w, wl, gamma)
            rel = br / np.power(u0, -gamma)
            g_rel = g_gamma(u0, w, u0l, wl, gamma) / _scale(u0, w, u0l, wl, gamma)
            # signs may only disagree where both sit within tolerance of zero
            clash = (np.sign(br) != np.sign(g_rel)) & ((rel > rel_tol) | (g_rel > rel_tol))
            v = _verdict(gamma, len(u0), rel, (u0, u0l, w, wl), rel_tol)
            v.passed = v.passed and not bool(np.any(clash))
            if best is None or v.worst_value > best.worst_value or not v.passed:
                best = v
        best.samples = sum(len(b[0]) for b in batches)
        out.append(best)
    return out
