"""Masked Cartesian grids on symmetric convex domains and the moving-plane
vocabulary on them: reflections, caps, a(nu) and lambda_1(nu).

Fields on a grid are plain 1-D arrays indexed by node row; the boundary value
is implicitly zero.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import AsymmetricGrid, EmptyCap, SpacingTooCoarse, ConfigError

__all__ = [
    "DomainSpec",
    "Direction",
    "Grid",
    "CapSection",
    "build_grid",
    "reflect_point",
    "a_of_nu",
    "lambda1_of_nu",
    "cap_section",
    "bilinear_stencil",
    "interpolate",
]

MIN_NODES_PER_AXIS = 7
CLOSURE_RTOL = 1e-12  # relative to h: strict interiority / containment
SNAP_RTOL = 1e-9  # relative to h: a point this close to a lattice site is on it
BOUNDARY_SAMPLES = 256


@dataclass(frozen=True)
class DomainSpec:
    """One of the supported convex, symmetric domains.

    ``shape`` is ``"interval"``, ``"rectangle"`` or ``"disk"``.  Box shapes
    store ``bounds = ((x_lo, x_hi), ...)``; the disk stores ``center`` and
    ``radius``.
    """

    shape: str
    bounds: tuple = ()
    center: tuple = ()
    radius: float = 0.0

    def __post_init__(self):
        if self.shape in ("interval", "rectangle"):
            want = 1 if self.shape == "interval" else 2
            if len(self.bounds) != want:
                raise ConfigError(f"{self.shape} needs {want} (lo, hi) pairs")
            for lo, hi in self.bounds:
                if not hi - lo > 0:
                    raise ConfigError(f"non-positive extent ({lo}, {hi})")
        elif self.shape == "disk":
            if len(self.center) != 2:
                raise ConfigError("disk center must have two coordinates")
            if not self.radius > 0:
                raise ConfigError("disk radius must be positive")
        else:
            raise ConfigError(f"unknown shape {self.shape!r}")

    @classmethod
    def interval(cls, x_lo, x_hi):
        return cls("interval", bounds=((float(x_lo), float(x_hi)),))

    @classmethod
    def rectangle(cls, x_lo, x_hi, y_lo, y_hi):
        return cls("rectangle", bounds=((float(x_lo), float(x_hi)), (float(y_lo), float(y_hi))))

    @classmethod
    def disk(cls, center=(0.0, 0.0), radius=1.0):
        return cls("disk", center=tuple(float(c) for c in center), radius=float(radius))

    @property
    def dim(self):
        return 1 if self.shape == "interval" else 2

    @property
    def midpoint(self):
        if self.shape == "disk":
            return np.array(self.center)
        return np.array([0.5 * (lo + hi) for lo, hi in self.bounds])

    @property
    def measure(self):
        if self.shape == "disk":
            return math.pi * self.radius**2
        return math.prod(hi - lo for lo, hi in self.bounds)

    def signed_distance(self, points):
        """Negative inside, zero on the boundary, positive outside.

        Exact inside the domain; outside boxes it is the max-norm excess,
        which has the right sign and is all the containment tests need.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self.shape == "disk":
            return np.hypot(*(p - self.midpoint).T) - self.radius
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.max(np.maximum(lo - p, p - hi), axis=1)

    def boundary_samples(self, count=BOUNDARY_SAMPLES):
        if self.shape == "interval":
            (lo, hi), = self.bounds
            return np.array([[lo], [hi]])
        if self.shape == "disk":
            t = 2 * np.pi * np.arange(count) / count
            return self.midpoint + self.radius * np.column_stack([np.cos(t), np.sin(t)])
        (x0, x1), (y0, y1) = self.bounds
        corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]])
        seg = np.linalg.norm(np.diff(corners, axis=0), axis=1)
        s = np.arange(count) * seg.sum() / count
        out = []
        for si in s:
            k = min(np.searchsorted(np.cumsum(seg), si, side="right"), 3)
            start = si - np.concatenate([[0.0], np.cumsum(seg)])[k]
            out.append(corners[k] + (corners[k + 1] - corners[k]) * start / seg[k])
        return np.array(out)

    def to_dict(self):
        if self.shape == "interval":
            (lo, hi), = self.bounds
            return {"shape": "interval", "x_lo": lo, "x_hi": hi}
        if self.shape == "rectangle":
            (x0, x1), (y0, y1) = self.bounds
            return {"shape": "rectangle", "x_lo": x0, "x_hi": x1, "y_lo": y0, "y_hi": y1}
        return {"shape": "disk", "center": list(self.center), "radius": self.radius}

    @classmethod
    def from_dict(cls, d):
        try:
            shape = d["shape"]
            if shape == "interval":
                return cls.interval(d["x_lo"], d["x_hi"])
            if shape == "rectangle":
                return cls.rectangle(d["x_lo"], d["x_hi"], d["y_lo"], d["y_hi"])
            if shape == "disk":
                return cls.disk(d.get("center", (0.0, 0.0)), d["radius"])
        except KeyError as exc:
            raise ConfigError(f"domain is missing {exc}") from None
        raise ConfigError(f"unknown shape {shape!r}")


@dataclass(frozen=True)
class Direction:
    """Unit vector nu."""

    components: tuple

    def __post_init__(self):
        v = np.asarray(self.components, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-14:
            raise ValueError(f"direction {self.components} is not a unit vector")

    @classmethod
    def of(cls, v, normalize=False):
        if isinstance(v, Direction):
            return v
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(tuple(float(c) for c in v))

    @classmethod
    def axis(cls, k, dim=2, sign=1):
        v = [0.0] * dim
        v[k] = float(sign)
        return cls(tuple(v))

    @property
    def vector(self):
        return np.array(self.components)

    @property
    def dim(self):
        return len(self.components)

    def axis_index(self):
        """Index of the coordinate axis nu is parallel to, or None."""
        v = self.vector
        nz = np.flatnonzero(v != 0.0)
        if len(nz) == 1 and abs(v[nz[0]]) == 1.0:
            return int(nz[0])
        return None


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior nodes of a uniform lattice restricted to a domain.

    ``index`` holds integer lattice coordinates (node = origin + index * h),
    rows sorted lexicographically.  ``neighbors[:, 2d]`` / ``[:, 2d+1]`` are
    the rows of the -e_d / +e_d neighbours (-1 when the arm hits the
    boundary); ``arms`` holds the matching fractional arm lengths in (0, 1].
    """

    spec: DomainSpec
    h: float
    origin: np.ndarray
    index: np.ndarray
    coords: np.ndarray
    neighbors: np.ndarray
    arms: np.ndarray
    _table: np.ndarray = field(repr=False)
    _offset: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.spec.dim

    @property
    def size(self):
        return len(self.coords)

    @property
    def measure_per_node(self):
        return self.h**self.dim

    @property
    def key(self):
        return (self.spec, self.h)

    def same_as(self, other):
        return self is other or self.key == other.key

    def lookup(self, idx):
        """Rows of the nodes at integer lattice positions ``idx`` (-1 if absent)."""
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        rel = idx - self._offset
        shape = np.array(self._table.shape)
        ok = np.all((rel >= 0) & (rel < shape), axis=1)
        out = np.full(len(idx), -1, dtype=np.int64)
        if ok.any():
            out[ok] = self._table[tuple(rel[ok].T)]
        return out

    def boundary_distance(self):
        return -self.spec.signed_distance(self.coords)

    def trimmed(self, collar):
        """Mask of nodes at distance >= collar * h from the boundary."""
        return self.boundary_distance() >= collar * self.h * (1 - 1e-12)

    def reflection_permutation(self, nu):
        """Row permutation realising reflection through T_0^nu (the plane through
        the domain centre), or None when the node set is not closed under it."""
        nu = Direction.of(nu)
        lam = float(self.midpoint @ nu.vector)
        pts = reflect_point(self.coords, nu, lam)
        pos = (pts - self.origin) / self.h
        idx = np.rint(pos).astype(np.int64)
        if np.max(np.abs(pos - idx), initial=0.0) > SNAP_RTOL:
            return None
        rows = self.lookup(idx)
        if np.any(rows < 0):
            return None
        return rows

    @property
    def midpoint(self):
        return self.spec.midpoint


def _box_axis_nodes(lo, hi, h):
    count = int(math.floor((hi - lo) / h + SNAP_RTOL))
    k = np.arange(1, count + 1)
    x = lo + k * h
    return k[x < hi - CLOSURE_RTOL * h]


def build_grid(spec, h):
    """Interior nodes of the lattice of spacing ``h`` restricted to ``spec``.

    Box domains are anchored at their lower corner, disks at their centre.
    Raises SpacingTooCoarse below seven nodes per axis and AsymmetricGrid when
    the node set is not closed under the axis reflections through the centre.
    """
    h = float(h)
    if not h > 0:
        raise ValueError("spacing must be positive")
    dim = spec.dim
    if spec.shape == "disk":
        origin = spec.midpoint.copy()
        K = int(math.ceil(spec.radius / h))
        ax = np.arange(-K, K + 1)
        I, J = np.meshgrid(ax, ax, indexing="ij")
        idx = np.column_stack([I.ravel(), J.ravel()])
        pts = origin + idx * h
        keep = spec.signed_distance(pts) < -CLOSURE_RTOL * h
        idx = idx[keep]
        per_axis = [np.count_nonzero(idx[:, 1 - d] == 0) for d in range(2)]
    else:
        origin = np.array([lo for lo, _ in spec.bounds])
        axes = [_box_axis_nodes(lo, hi, h) for lo, hi in spec.bounds]
        per_axis = [len(a) for a in axes]
        if min(per_axis) >= 1:
            mesh = np.meshgrid(*axes, indexing="ij")
            idx = np.column_stack([m.ravel() for m in mesh])
        else:
            idx = np.zeros((0, dim), dtype=np.int64)
    if min(per_axis) < MIN_NODES_PER_AXIS:
        raise SpacingTooCoarse(
            f"h={h} leaves {min(per_axis)} interior nodes on some axis "
            f"(need {MIN_NODES_PER_AXIS})"
        )
    order = np.lexsort(idx.T[::-1])
    idx = idx[order].astype(np.int64)
    coords = origin + idx * h

    offset = idx.min(axis=0)
    table = np.full(tuple(idx.max(axis=0) - offset + 1), -1, dtype=np.int64)
    table[tuple((idx - offset).T)] = np.arange(len(idx))

    neighbors = np.full((len(idx), 2 * dim), -1, dtype=np.int64)
    arms = np.ones((len(idx), 2 * dim))
    for d in range(dim):
        for s, col in ((-1, 2 * d), (1, 2 * d + 1)):
            step = np.zeros(dim, dtype=np.int64)
            step[d] = s
            rel = idx + step - offset
            inside = np.all((rel >= 0) & (rel < np.array(table.shape)), axis=1)
            nb = np.full(len(idx), -1, dtype=np.int64)
            nb[inside] = table[tuple(rel[inside].T)]
            neighbors[:, col] = nb
            cut = nb < 0
            if cut.any():
                arms[cut, col] = _arm_fraction(spec, coords[cut], d, s, h)

    grid = Grid(spec, h, origin, idx, coords, neighbors, arms, table, offset)
    for k in range(dim):
        if grid.reflection_permutation(Direction.axis(k, dim)) is None:
            raise AsymmetricGrid(
                f"h={h} does not divide the half-extents of {spec.to_dict()}"
            )
    return grid


def _arm_fraction(spec, pts, d, s, h):
    """Distance from ``pts`` to the boundary along s*e_d, in units of h, capped at 1."""
    if spec.shape == "disk":
        rel = pts - spec.midpoint
        b = s * rel[:, d]
        c = np.sum(rel**2, axis=1) - spec.radius**2
        dist = -b + np.sqrt(b * b - c)
    else:
        lo, hi = spec.bounds[d]
        dist = (hi - pts[:, d]) if s > 0 else (pts[:, d] - lo)
    return np.minimum(dist / h, 1.0)


def reflect_point(x, nu, lam):
    """Reflection x + 2(lam - x.nu) nu through the hyperplane {x.nu = lam}."""
    v = Direction.of(nu).vector
    x = np.asarray(x, dtype=float)
    return x + 2.0 * (lam - x @ v)[..., None] * v


def a_of_nu(spec, nu):
    """inf over the domain of x.nu (exact)."""
    v = Direction.of(nu).vector
    if spec.shape == "disk":
        return float(spec.midpoint @ v - spec.radius)
    return float(sum(min(lo * c, hi * c) for (lo, hi), c in zip(spec.bounds, v)))


def _reflected_cap_contained(spec, v, t, samples):
    below = samples[samples @ v < t]
    if len(below) == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(samples))))
    return bool(np.all(spec.signed_distance(reflect_point(below, v, t)) <= 1e-12 * scale))


def lambda1_of_nu(spec, nu, samples=BOUNDARY_SAMPLES):
    """sup of the lambdas for which every reflected cap up to lambda stays inside.

    Symmetry axes (any direction for a disk) are evaluated analytically: the
    answer is the plane through the centre.  Other directions are bisected on
    the containment predicate over sampled boundary points.
    """
    nu = Direction.of(nu)
    if spec.shape == "disk" or nu.axis_index() is not None:
        return float(spec.midpoint @ nu.vector)
    v = nu.vector
    pts = spec.boundary_samples(samples)
    lo, hi = a_of_nu(spec, v), -a_of_nu(spec, -v)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _reflected_cap_contained(spec, v, mid, pts):
            lo = mid
        else:
            hi = mid
    return lo


def bilinear_stencil(grid, points):
    """Multilinear interpolation stencils for arbitrary points.

    Returns ``(rows, weights, exact)``: ``rows`` is (m, 2**dim) with -1 for
    lattice corners that are not interior nodes (their value is the boundary
    value 0), ``weights`` are non-negative and sum to 1, ``exact`` flags points
    sitting on a lattice site.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dim = grid.dim
    pos = (pts - grid.origin) / grid.h
    near = np.rint(pos)
    exact = np.all(np.abs(pos - near) <= SNAP_RTOL, axis=1)
    base = np.floor(pos)
    frac = pos - base
    # snap exact points onto the lattice so weights are exactly 0/1
    base[exact] = near[exact]
    frac[exact] = 0.0
    base = base.astype(np.int64)
    ncorner = 2**dim
    rows = np.empty((len(pts), ncorner), dtype=np.int64)
    weights = np.empty((len(pts), ncorner))
    for c in range(ncorner):
        bits = np.array([(c >> d) & 1 for d in range(dim)])
        rows[:, c] = grid.lookup(base + bits)
        weights[:, c] = np.prod(np.where(bits == 1, frac, 1.0 - frac), axis=1)
    return rows, weights, exact


def interpolate(grid, values, points):
    """Values of a grid field at ``points`` with zero extension outside the nodes."""
    rows, weights, _ = bilinear_stencil(grid, points)
    v = np.asarray(values, dtype=float)
    gathered = np.where(rows >= 0, v[np.maximum(rows, 0)], 0.0)
    return np.sum(gathered * weights, axis=1)


@dataclass(frozen=True, eq=False)
class CapSection:
    """Nodes of the cap {x.nu < lam} together with their reflected targets."""

    grid: Grid
    nu: Direction
    lam: float
    rows: np.ndarray
    targets: np.ndarray
    stencil_rows: np.ndarray
    stencil_weights: np.ndarray
    exact: np.ndarray
    contained: np.ndarray

    @property
    def size(self):
        return len(self.rows)


def cap_section(grid, nu, lam):
    nu = Direction.of(nu)
    if nu.dim != grid.dim:
        raise ValueError("direction dimension does not match the grid")
    lam = float(lam)
    rows = np.flatnonzero(grid.coords @ nu.vector < lam)
    if len(rows) == 0:
        raise EmptyCap(f"no node with x.nu < {lam} at h={grid.h}")
    targets = reflect_point(grid.coords[rows], nu, lam)
    srows, sw, exact = bilinear_stencil(grid, targets)
    contained = grid.spec.signed_distance(targets) <= CLOSURE_RTOL * grid.h
    return CapSection(grid, nu, lam, rows, targets, srows, sw, exact, contained)
