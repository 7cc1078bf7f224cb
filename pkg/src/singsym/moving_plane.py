"""Numerical checks of the moving-plane conclusions on solved fields.

Continuum strict inequalities become quantified margins: a check passes when
its margin is >= -floor with floor = max(1e-8, K h^2), evaluated on nodes at
least ``boundary_collar * h`` away from the boundary.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import math

import numpy as np

from .errors import (
    AxisNotClosed,
    CapOutsideDomain,
    EmptyCap,
    EmptyTrimmedCap,
    NotADisk,
)
from .geometry import Direction, a_of_nu, cap_section, interpolate, lambda1_of_nu

__all__ = [
    "SweepConfig",
    "MarginRecord",
    "MonotonicityRecord",
    "SymmetryRecord",
    "RadialReport",
    "PositivityRecord",
    "WeakComparisonRecord",
    "SweepReport",
    "reflected_values",
    "verify_reflection_order",
    "verify_monotonicity",
    "verify_axial_symmetry",
    "verify_radial",
    "verify_positivity",
    "verify_weak_comparison_small",
    "strong_dichotomy_probe",
    "lambda_grid",
    "random_subdomains",
    "run_sweep",
]

PASS, FAIL = "pass", "fail"
FLAT = "degenerate-flat"
EMPTY = "empty"
NOT_APPLICABLE = "not-applicable"


@dataclass
class SweepConfig:
    directions: list = None
    lambda_count: int = 16
    boundary_collar: float = 4.0
    K: float = 10.0
    floor_min: float = 1e-8
    symmetry_tol: float = 1e-6
    subdomains: int = 20

    def __post_init__(self):
        if self.lambda_count < 3:
            raise ValueError("lambda_count must be >= 3")
        if self.boundary_collar < 1:
            raise ValueError("boundary_collar must be >= 1")

    def floor(self, h):
        return max(self.floor_min, self.K * h * h)

    def resolved_directions(self, dim):
        if self.directions:
            return [Direction.of(d, normalize=True) for d in self.directions]
        return [Direction.axis(k, dim, s) for k in range(dim) for s in (1, -1)]

    def to_dict(self):
        d = asdict(self)
        if self.directions:
            d["directions"] = [list(Direction.of(v, normalize=True).components) for v in self.directions]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _nu_list(nu):
    return [float(c) for c in nu.components]


@dataclass
class MarginRecord:
    field: str
    nu: list
    lam: float
    min_margin: float
    count: int
    verdict: str
    worst_node: int = -1


@dataclass
class MonotonicityRecord:
    field: str
    nu: list
    min_derivative: float
    count: int
    verdict: str
    strict: bool


@dataclass
class SymmetryRecord:
    field: str
    nu: list
    deviation: float
    verdict: str


@dataclass
class RadialReport:
    field: str
    bin_count: int
    max_spread: float
    max_raw_spread: float
    max_slope: float
    verdict: str


@dataclass
class PositivityRecord:
    field: str
    min_value: float
    count: int
    verdict: str


@dataclass
class WeakComparisonRecord:
    nu: list
    lam: float
    measure: float
    delta: float
    min_margin: float
    worst_node: int
    verdict: str
    reason: str = ""


def _is_flat(values, floor):
    return float(np.max(np.abs(values), initial=0.0)) <= floor


def reflected_values(field, cap):
    """field(x_lam^nu) for every cap node (multilinear, zero outside the nodes)."""
    if not np.all(cap.contained):
        raise CapOutsideDomain(f"reflected cap leaves the domain at lambda={cap.lam}")
    v = field.values
    gathered = np.where(cap.stencil_rows >= 0, v[np.maximum(cap.stencil_rows, 0)], 0.0)
    return np.sum(gathered * cap.stencil_weights, axis=1)


def _check_lambda(grid, nu, lam):
    a = a_of_nu(grid.spec, nu)
    l1 = lambda1_of_nu(grid.spec, nu)
    if not a < lam <= l1 + 1e-12:
        raise ValueError(f"lambda={lam} outside ({a}, {l1}]")


def _trimmed_cap(grid, cap, cfg, plane_band=False):
    keep = grid.trimmed(cfg.boundary_collar)[cap.rows]
    if plane_band:
        keep &= cap.lam - grid.coords[cap.rows] @ cap.nu.vector >= cfg.boundary_collar * grid.h * (1 - 1e-12)
    return keep


def verify_reflection_order(field, nu, lam, cfg=None, cap=None, name="field"):
    """min of field_lam - field over the collar-trimmed cap."""
    cfg = cfg or SweepConfig()
    grid = field.grid
    nu = Direction.of(nu)
    _check_lambda(grid, nu, lam)
    cap = cap or cap_section(grid, nu, lam)
    keep = _trimmed_cap(grid, cap, cfg)
    if not keep.any():
        raise EmptyTrimmedCap(f"no cap node beyond the collar at lambda={lam}")
    margin = (reflected_values(field, cap) - field.values[cap.rows])[keep]
    k = int(np.argmin(margin))
    m = float(margin[k])
    verdict = PASS if m >= -cfg.floor(grid.h) else FAIL
    return MarginRecord(name, _nu_list(nu), float(lam), m, int(keep.sum()), verdict, int(cap.rows[keep][k]))


def verify_monotonicity(field, nu, cfg=None, name="field"):
    """min of the centred difference along nu over the trimmed half-domain
    {x.nu < lambda_1(nu)}."""
    cfg = cfg or SweepConfig()
    grid = field.grid
    nu = Direction.of(nu)
    floor = cfg.floor(grid.h)
    l1 = lambda1_of_nu(grid.spec, nu)
    rows = np.flatnonzero(grid.trimmed(cfg.boundary_collar) & (grid.coords @ nu.vector < l1 - 1e-12))
    if _is_flat(field.values, floor) or len(rows) == 0:
        return MonotonicityRecord(name, _nu_list(nu), 0.0, len(rows), FLAT, False)
    step = grid.h * nu.vector
    x = grid.coords[rows]
    d = (interpolate(grid, field.values, x + step) - interpolate(grid, field.values, x - step)) / (2 * grid.h)
    m = float(np.min(d))
    return MonotonicityRecord(name, _nu_list(nu), m, len(rows), PASS if m >= -floor else FAIL, m > 0)


def verify_axial_symmetry(field, nu, cfg=None, name="field"):
    """sup |field - field o R_0^nu| by exact node permutation."""
    cfg = cfg or SweepConfig()
    nu = Direction.of(nu)
    perm = field.grid.reflection_permutation(nu) if nu.axis_index() is not None else None
    if perm is None:
        raise AxisNotClosed(f"grid is not closed under reflection along {nu.components}")
    dev = float(np.max(np.abs(field.values - field.values[perm]), initial=0.0))
    return SymmetryRecord(name, _nu_list(nu), dev, PASS if dev <= cfg.symmetry_tol else FAIL)


def verify_radial(field, cfg=None, name="field"):
    """Radial symmetry and decrease on a disk.

    Nodes are binned by radius (width h).  A radial profile is built by
    linear interpolation through the bin means; ``max_spread`` is the largest
    in-bin spread of the deviation from that profile, which removes the
    O(h |u_r|) spread a sloped radial function has inside a bin of width h
    (``max_raw_spread`` keeps the raw value).  Slopes are between adjacent
    bin means.  Only bins inside [collar h, R - collar h] are judged.
The verdict allows spread <= K h, the Lipschitz scale of a bin.
    """
    cfg = cfg or SweepConfig()
    grid = field.grid
    if grid.spec.shape != "disk":
        raise NotADisk("radial check needs a disk")
    h = grid.h
    floor = cfg.floor(h)
    R = grid.spec.radius
    v = field.values
    r = np.hypot(*(grid.coords - grid.spec.midpoint).T)
    k = np.floor(r / h + 1e-12).astype(int)
    bins = np.unique(k)
    rbar = np.array([r[k == b].mean() for b in bins])
    vbar = np.array([v[k == b].mean() for b in bins])
    dev = v - np.interp(r, rbar, vbar)
    lo, hi = cfg.boundary_collar * h, R - cfg.boundary_collar * h
    judged = [i for i, b in enumerate(bins) if b * h >= lo - 1e-12 and (b + 1) * h <= hi + 1e-12]
    if _is_flat(v, floor) or len(judged) < 2:
        return RadialReport(name, len(judged), 0.0, 0.0, 0.0, FLAT)
    spread = max(np.ptp(dev[k == bins[i]]) for i in judged)
    raw = max(np.ptp(v[k == bins[i]]) for i in judged)
    slopes = [
        (vbar[j] - vbar[i]) / (rbar[j] - rbar[i]) for i, j in zip(judged, judged[1:]) if j == i + 1
    ]
    max_slope = float(max(slopes))
    ok = spread <= cfg.K * h and max_slope < floor
    return RadialReport(name, len(judged), float(spread), float(raw), max_slope, PASS if ok else FAIL)


def verify_positivity(w, cfg=None, name="w"):
    """min of w on the trimmed interior; pass only when strictly positive."""
    cfg = cfg or SweepConfig()
    grid = w.grid
    keep = grid.trimmed(cfg.boundary_collar)
    if _is_flat(w.values, cfg.floor(grid.h)):
        return PositivityRecord(name, float(np.min(w.values[keep], initial=0.0)), int(keep.sum()), FLAT)
    m = float(np.min(w.values[keep]))
    return PositivityRecord(name, m, int(keep.sum()), PASS if m > 0 else FAIL)


def _discrete_boundary(grid, rows):
    member = np.zeros(grid.size, dtype=bool)
    member[rows] = True
    nb = grid.neighbors[rows]
    outside = (nb < 0) | ~member[np.maximum(nb, 0)]
    return np.any(outside, axis=1)


def verify_weak_comparison_small(w, nu, lam, subset, delta, cfg=None):
    """If the subset is small (measure <= delta) and w <= w_lam on its discrete
    boundary, check w <= w_lam on the whole subset.

    Unmet hypotheses give verdict "not-applicable", never "fail".
    """
    cfg = cfg or SweepConfig()
    grid = w.grid
    nu = Direction.of(nu)
    floor = cfg.floor(grid.h)
    rows = np.unique(np.asarray(subset, dtype=np.int64))
    if len(rows) == 0:
        raise ValueError("empty subdomain")
    if np.any(grid.coords[rows] @ nu.vector >= lam):
        raise ValueError("subdomain must lie inside the cap")
    cap = cap_section(grid, nu, lam)
    pos = np.searchsorted(cap.rows, rows)
    wl = reflected_values(w, cap)[pos]
    margin = wl - w.values[rows]
    measure = len(rows) * grid.measure_per_node
    dval = delta.delta if hasattr(delta, "delta") else float(delta)
    base = dict(nu=_nu_list(nu), lam=float(lam), measure=measure, delta=dval)
    if measure > dval:
        return WeakComparisonRecord(**base, min_margin=math.nan, worst_node=-1,
                                    verdict=NOT_APPLICABLE, reason="measure exceeds delta")
    bnd = _discrete_boundary(grid, rows)
    if np.any(margin[bnd] < -floor):
        return WeakComparisonRecord(**base, min_margin=float(np.min(margin[bnd])), worst_node=-1,
                                    verdict=NOT_APPLICABLE, reason="boundary ordering fails")
    k = int(np.argmin(margin))
    m = float(margin[k])
    return WeakComparisonRecord(**base, min_margin=m, worst_node=int(rows[k]),
                                verdict=PASS if m >= -floor else FAIL)


def strong_dichotomy_probe(w, nu, lam, cfg=None):
    """Classify an ordered pair (w, w_lam) as "strict", "identical" or "violation".

    "identical": sup |w - w_lam| <= floor on the trimmed cap.  "strict": the
    margin exceeds floor on the cap trimmed both at the boundary and at the
    plane (the margin vanishes on the plane itself).
    """
    cfg = cfg or SweepConfig()
    grid = w.grid
    nu = Direction.of(nu)
    floor = cfg.floor(grid.h)
    cap = cap_section(grid, nu, lam)
    diff = reflected_values(w, cap) - w.values[cap.rows]
    keep = _trimmed_cap(grid, cap, cfg)
    if not keep.any():
        raise EmptyTrimmedCap(f"no cap node beyond the collar at lambda={lam}")
    if float(np.max(np.abs(diff[keep]))) <= floor:
        return "identical"
    inner = _trimmed_cap(grid, cap, cfg, plane_band=True)
    if inner.any() and float(np.min(diff[inner])) > floor and float(np.min(diff[keep])) >= -floor:
        return "strict"
    return "violation"


def lambda_grid(spec, nu, count, include_end=True):
    """``count`` uniform values in (a(nu), lambda_1(nu)] (or the open interval)."""
    a = a_of_nu(spec, nu)
    l1 = lambda1_of_nu(spec, nu)
    if include_end:
        return [a + k * (l1 - a) / count for k in range(1, count + 1)]
    return [a + k * (l1 - a) / (count + 1) for k in range(1, count + 1)]


def random_subdomains(grid, nu, lam, count, rng, cfg=None, max_measure=math.inf):
    """Random boxes intersected with the trimmed cap, measure capped."""
    cfg = cfg or SweepConfig()
    nu = Direction.of(nu)
    cap = cap_section(grid, nu, lam)
    pool = cap.rows[_trimmed_cap(grid, cap, cfg)]
    out = []
    if len(pool) == 0:
        return out
    lo, hi = grid.coords[pool].min(axis=0), grid.coords[pool].max(axis=0)
    max_nodes = max(1, int(min(len(pool), max_measure / grid.measure_per_node)))
    for _ in range(count):
        centre = grid.coords[rng.choice(pool)]
        half = rng.uniform(2 * grid.h, np.maximum(hi - lo, 4 * grid.h), size=grid.dim) / 2
        inside = np.all(np.abs(grid.coords[pool] - centre) <= half, axis=1)
        rows = pool[inside]
        if len(rows) > max_nodes:
            order = np.argsort(np.linalg.norm(grid.coords[rows] - centre, axis=1), kind="stable")
            rows = np.sort(rows[order[:max_nodes]])
        out.append(rows)
    return out


@dataclass
class SweepReport:
    grid_h: float
    domain: dict
    margins: list = field(default_factory=list)
    monotonicity: list = field(default_factory=list)
    symmetry: list = field(default_factory=list)
    radial: list = field(default_factory=list)
    positivity: list = field(default_factory=list)
    dichotomy: list = field(default_factory=list)
    weak_comparison: list = field(default_factory=list)
    banner: str = ""

    def failures(self):
        out = []
        for group in ("margins", "monotonicity", "symmetry", "radial", "positivity", "weak_comparison"):
            for rec in getattr(self, group):
                if rec.verdict == FAIL:
                    out.append(f"{group}:{getattr(rec, 'field', 'w')}:{getattr(rec, 'nu', '')}")
        return out

    @property
    def passed(self):
        return not self.failures()

    def to_dict(self):
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
            return x

        def rec(r):
            return {k: clean(v) for k, v in asdict(r).items()} if not isinstance(r, dict) else r

        return {
            "schema": "v1",
            "domain": self.domain,
            "h": self.grid_h,
            "banner": self.banner,
            "passed": self.passed,
            "failures": self.failures(),
            "margins": [rec(r) for r in self.margins],
            "monotonicity": [rec(r) for r in self.monotonicity],
            "symmetry": [rec(r) for r in self.symmetry],
            "radial": [rec(r) for r in self.radial],
            "positivity": [rec(r) for r in self.positivity],
            "dichotomy": self.dichotomy,
            "weak_comparison": [rec(r) for r in self.weak_comparison],
        }

    def csv_text(self, name):
        lines = ["nu_x,nu_y,lambda,min_margin,verdict"]
        for r in self.margins:
            if r.field != name:
                continue
            nu_y = r.nu[1] if len(r.nu) > 1 else 0.0
            lines.append(f"{r.nu[0]!r},{nu_y!r},{r.lam!r},{r.min_margin!r},{r.verdict}")
        return "\n".join(lines) + "\n"


def _margin_task(args):
    fields, nu, lam, cfg = args
    grid = next(iter(fields.values())).grid
    try:
        cap = cap_section(grid, nu, lam)
    except EmptyCap:
        return [MarginRecord(n, _nu_list(nu), lam, math.nan, 0, EMPTY) for n in fields]
    out = []
    for name, f in fields.items():
        try:
            out.append(verify_reflection_order(f, nu, lam, cfg, cap=cap, name=name))
        except EmptyTrimmedCap:
            out.append(MarginRecord(name, _nu_list(nu), lam, math.nan, 0, EMPTY))
    return out


def run_sweep(fields, cfg=None, delta=None, seed=0, threads=1, banner=""):
    """Run every check over ``fields`` (a dict with any of "u0", "w", "u").

    Reflection margins are swept over ``lambda_count`` values per direction;
    w additionally gets positivity, the dichotomy probe and, when ``delta`` is
    given, the weak comparison on random small subdomains.
    """
    cfg = cfg or SweepConfig()
    grid = next(iter(fields.values())).grid
    for f in fields.values():
        if not f.grid.same_as(grid):
            raise ValueError("all fields must share one grid")
    floor = cfg.floor(grid.h)
    report = SweepReport(grid.h, grid.spec.to_dict(), banner=banner)
    dirs = cfg.resolved_directions(grid.dim)

    tasks = [(fields, nu, lam, cfg) for nu in dirs for lam in lambda_grid(grid.spec, nu, cfg.lambda_count)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(_margin_task, tasks))
    else:
        results = [_margin_task(t) for t in tasks]
    for batch in results:
        report.margins.extend(batch)

    for nu in dirs:
        for name, f in fields.items():
            report.monotonicity.append(verify_monotonicity(f, nu, cfg, name))
            if nu.axis_index() is not None and f.grid.reflection_permutation(nu) is not None:
                report.symmetry.append(verify_axial_symmetry(f, nu, cfg, name))
    if grid.spec.shape == "disk":
        report.radial.extend(verify_radial(f, cfg, name) for name, f in fields.items())

    w = fields.get("w")
    if w is not None:
        report.positivity.append(verify_positivity(w, cfg))
        flat = _is_flat(w.values, floor)
        rng = np.random.default_rng(seed)
        for nu in dirs:
            lams = lambda_grid(grid.spec, nu, cfg.lambda_count)
            for lam in lams:
                if flat:
                    kind = FLAT
                else:
                    try:
                        kind = strong_dichotomy_probe(w, nu, lam, cfg)
                    except (EmptyCap, EmptyTrimmedCap):
                        kind = EMPTY
                report.dichotomy.append({"nu": _nu_list(nu), "lambda": lam, "class": kind})
            if delta is not None:
                lam = lams[len(lams) // 2]
                for rows in random_subdomains(grid, nu, lam, cfg.subdomains, rng, cfg, delta.delta):
                    report.weak_comparison.append(verify_weak_comparison_small(w, nu, lam, rows, delta, cfg))
    return report
