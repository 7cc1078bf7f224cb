"""The exponent gamma, the lower-order term f, and the (H_p) check.

f comes from a closed catalog so that its hypotheses can be checked:
``zero``, ``power`` (c s^q), ``linear`` (m s + b) and ``tabulated``
(piecewise linear through breakpoints, constant beyond the last one).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidNonlinearity, NegativeArgument, NonPositiveArgument

__all__ = [
    "FSpec",
    "NonlinearitySpec",
    "HpReport",
    "eval_singular",
    "eval_regularized",
    "eval_f",
    "eval_f_derivative",
    "check_hp",
]


@dataclass(frozen=True)
class FSpec:
    kind: str = "zero"
    q: float = 1.0
    c: float = 1.0
    slope: float = 0.0
    intercept: float = 0.0
    points: tuple = ()

    def __post_init__(self):
        if self.kind == "power":
            if not self.q > 0 or not self.c >= 0:
                raise InvalidNonlinearity("power needs q > 0 and c >= 0")
        elif self.kind == "linear":
            if not self.slope >= 0 or not self.intercept >= 0:
                raise InvalidNonlinearity("linear needs slope >= 0 and intercept >= 0")
        elif self.kind == "tabulated":
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise InvalidNonlinearity("tabulated needs at least two (s, f) pairs")
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise InvalidNonlinearity("tabulated abscissae must be strictly increasing")
        elif self.kind != "zero":
            raise InvalidNonlinearity(f"unknown f kind {self.kind!r}")

    @classmethod
    def power(cls, q, c=1.0):
        return cls("power", q=float(q), c=float(c))

    @classmethod
    def linear(cls, slope, intercept=0.0):
        return cls("linear", slope=float(slope), intercept=float(intercept))

    @classmethod
    def tabulated(cls, points):
        return cls("tabulated", points=tuple((float(a), float(b)) for a, b in points))

    @property
    def is_zero(self):
        return self.kind == "zero" or (self.kind == "power" and self.c == 0.0)

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "q": self.q, "c": self.c}
        if self.kind == "linear":
            return {"kind": "linear", "slope": self.slope, "intercept": self.intercept}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "points": [list(p) for p in self.points]}
        return {"kind": "zero"}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind", "zero")
        if kind == "power":
            return cls.power(d["q"], d.get("c", 1.0))
        if kind == "linear":
            return cls.linear(d["slope"], d.get("intercept", 0.0))
        if kind == "tabulated":
            return cls.tabulated(d["points"])
        if kind == "zero":
            return cls()
        raise InvalidNonlinearity(f"unknown f kind {kind!r}")


@dataclass(frozen=True)
class NonlinearitySpec:
    gamma: float
    f: FSpec = field(default_factory=FSpec)
    hp_status: str = "unchecked"

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidNonlinearity("gamma must be positive")

    def without_f(self):
        return replace(self, f=FSpec(), hp_status="unchecked")

    def checked(self, s_max=10.0, samples=1000):
        report = check_hp(self, s_max, samples)
        status = "satisfied" if report.verdict else f"violated({'; '.join(report.reasons)})"
        return replace(self, hp_status=status)

    def to_dict(self):
        return {"gamma": self.gamma, "f": self.f.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["gamma"]), FSpec.from_dict(d.get("f", {"kind": "zero"})))


@dataclass(frozen=True)
class HpReport:
    non_decreasing: bool
    strictly_positive_on_positive: bool
    f0_nonneg: bool
    lipschitz_estimate: float
    sample_range: tuple
    reasons: tuple = ()

    @property
    def verdict(self):
        return self.non_decreasing and self.strictly_positive_on_positive and self.f0_nonneg


def eval_singular(s, spec):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise NonPositiveArgument("singular term needs s > 0")
    return s ** -spec.gamma


def eval_regularized(s, n, spec):
    """(s + 1/n)^-gamma; bounded by n^gamma."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise NegativeArgument("regularized term needs s >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    return (s + 1.0 / n) ** -spec.gamma


def eval_f(s, spec):
    f = spec.f if isinstance(spec, NonlinearitySpec) else spec
    s = np.asarray(s, dtype=float)
    if f.kind == "power":
        return f.c * s**f.q
    if f.kind == "linear":
        return f.slope * s + f.intercept
    if f.kind == "tabulated":
        pts = np.asarray(f.points)
        return np.interp(s, pts[:, 0], pts[:, 1])
    return np.zeros_like(s)


def eval_f_derivative(s, spec):
    """f'(s); the right derivative at tabulated kinks, +inf for s^q (q<1) at 0."""
    f = spec.f if isinstance(spec, NonlinearitySpec) else spec
    s = np.asarray(s, dtype=float)
    if f.kind == "power":
        if f.q == 1.0:
            return np.full_like(s, f.c)
        with np.errstate(divide="ignore"):
            return f.c * f.q * s ** (f.q - 1.0)
    if f.kind == "linear":
        return np.full_like(s, f.slope)
    if f.kind == "tabulated":
        pts = np.asarray(f.points)
        slopes = np.diff(pts[:, 1]) / np.diff(pts[:, 0])
        k = np.searchsorted(pts[:, 0], s, side="right") - 1
        inside = (k >= 0) & (k < len(slopes))
        return np.where(inside, slopes[np.clip(k, 0, len(slopes) - 1)], 0.0)
    return np.zeros_like(s)


def check_hp(spec, s_max, samples=1000):
    """Sample f on [0, s_max] and report which parts of (H_p) hold.

    ``lipschitz_estimate`` is the largest adjacent difference quotient.
    """
    if not s_max > 0 or samples < 100:
        raise ValueError("need s_max > 0 and at least 100 samples")
    s = np.linspace(0.0, s_max, samples + 1)
    fs = eval_f(s, spec)
    dq = np.diff(fs) / np.diff(s)
    reasons = []
    non_decreasing = bool(np.all(np.diff(fs) >= 0))
    positive = bool(np.all(fs[1:] > 0))
    f0 = bool(fs[0] >= 0)
    if not positive:
        reasons.append("f(s)>0 for s>0 fails")
    if not non_decreasing:
        reasons.append("non-decreasing fails")
    if not f0:
        reasons.append("f(0)>=0 fails")
    return HpReport(
        non_decreasing, positive, f0, float(np.max(np.abs(dq))), (0.0, float(s_max)), tuple(reasons)
    )
