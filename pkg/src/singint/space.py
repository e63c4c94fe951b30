"""Discrete metric measure spaces and regularity estimation.

A space is a finite weighted point set with a metric, split into a source
set X (where operators are evaluated) and a target set Y (which carries the
quadrature weights). X and Y may coincide, overlap, or be disjoint. Balls
are open, B(x, r) = {y : d(x, y) < r}, so B(x, 0) is empty; every ball
query takes a closed flag for the complementary convention.

All radius grids are floored at the mesh size h_min, the smallest nonzero
pairwise distance within Y. Below that scale a discrete measure is pure
atoms and regularity ratios are meaningless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "DiscreteSpace",
    "RegularityReport",
    "SphereConditionReport",
    "ball_measure",
    "ball_measure_grid",
    "estimate_upper_ahlfors",
    "estimate_strong_upper_ahlfors",
    "ahlfors_constant_all_radii",
    "check_sphere_condition",
    "load_space",
    "save_space",
    "two_point_space",
    "cantor_space",
    "random_cloud",
    "snowflake",
    "default_r_grid",
]

_TRIANGLE_SAMPLES = 256


def _index_array(idx, n, name):
    arr = np.asarray(idx, dtype=np.int64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if arr.min() < 0 or arr.max() >= n:
        raise ValueError(f"{name} contains indices outside [0, {n})")
    if np.unique(arr).size != arr.size:
        raise ValueError(f"{name} contains duplicate indices")
    return arr


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite weighted metric space with designated source and target sets.

    Attributes
    ----------
    dist : ndarray, shape (n, n)
        Full symmetric pairwise distance matrix with zero diagonal.
    weights : ndarray, shape (n,)
        Nonnegative quadrature weight per point. Only weights at
        y_indices enter integrals.
    x_indices, y_indices : ndarray of int
        Positions of the X and Y points in the global list.
    coords : ndarray, shape (n, dim), optional
        Ambient coordinates when the metric is Euclidean. Kernels that
        need geometry (signs, normals) require them.
    """

    dist: np.ndarray
    weights: np.ndarray
    x_indices: np.ndarray
    y_indices: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        dist = np.ascontiguousarray(np.asarray(self.dist, dtype=np.float64))
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ValueError("dist must be a square matrix")
        n = dist.shape[0]
        if not np.allclose(dist, dist.T, rtol=0.0, atol=1e-12 * max(1.0, dist.max(initial=0.0))):
            raise ValueError("dist must be symmetric")
        dist = 0.5 * (dist + dist.T)
        if np.any(np.diag(dist) != 0.0):
            raise ValueError("dist must have a zero diagonal")
        if np.any(dist < 0.0):
            raise ValueError("dist must be nonnegative")
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if weights.shape != (n,):
            raise ValueError("weights must have one entry per point")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "x_indices", _index_array(self.x_indices, n, "x_indices"))
        object.__setattr__(self, "y_indices", _index_array(self.y_indices, n, "y_indices"))
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[0] != n:
                raise ValueError("coords must be an (n, dim) array")
            object.__setattr__(self, "coords", coords)
        for arr in (self.dist, self.weights, self.x_indices, self.y_indices, self.coords):
            if arr is not None:
                arr.setflags(write=False)

    # ---- constructors -------------------------------------------------

    @classmethod
    def from_coords(cls, coords, weights=None, x=None, y=None):
        """Build a space with the Euclidean metric of an (n, dim) point array."""
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        n = coords.shape[0]
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(dist, 0.0)
        if weights is None:
            weights = np.ones(n)
        x = np.arange(n) if x is None else x
        y = np.arange(n) if y is None else y
        return cls(dist, weights, x, y, coords)

    @classmethod
    def from_matrix(cls, dist, weights, x=None, y=None, check_triangle=True):
        """Build a space from an explicit distance matrix.

        The triangle inequality is spot-checked on a deterministic sample
        of triples; a violation raises ValueError.
        """
        dist = np.asarray(dist, dtype=np.float64)
        n = dist.shape[0]
        x = np.arange(n) if x is None else x
        y = np.arange(n) if y is None else y
        space = cls(dist, weights, x, y, None)
        if check_triangle and n >= 3:
            rng = np.random.default_rng(0)
            trips = rng.integers(0, n, size=(_TRIANGLE_SAMPLES, 3))
            i, j, k = trips.T
            slack = 1e-9 * max(1.0, float(space.dist.max()))
            bad = space.dist[i, k] > space.dist[i, j] + space.dist[j, k] + slack
            if np.any(bad):
                b = int(np.argmax(bad))
                raise ValueError(
                    "triangle inequality fails on triple "
                    f"({i[b]}, {j[b]}, {k[b]})"
                )
        return space

    # ---- derived quantities -------------------------------------------

    @property
    def n_points(self):
        return self.dist.shape[0]

    @cached_property
    def w_y(self):
        return self.weights[self.y_indices]

    @cached_property
    def total_measure(self):
        """Total mass of Y, the sum of the Y weights."""
        return float(self.w_y.sum())

    @cached_property
    def dist_xy(self):
        return np.ascontiguousarray(self.dist[np.ix_(self.x_indices, self.y_indices)])

    @cached_property
    def dist_xx(self):
        return np.ascontiguousarray(self.dist[np.ix_(self.x_indices, self.x_indices)])

    @cached_property
    def h_min(self):
        """Mesh size: smallest nonzero pairwise distance within Y."""
        d = self.dist[np.ix_(self.y_indices, self.y_indices)]
        nz = d[d > 0.0]
        if nz.size == 0:
            raise ValueError("Y has no positive pairwise distance")
        return float(nz.min())

    @cached_property
    def diameter(self):
        both = np.union1d(self.x_indices, self.y_indices)
        return float(self.dist[np.ix_(both, both)].max())

    @cached_property
    def _x_row(self):
        row = np.full(self.n_points, -1, dtype=np.int64)
        row[self.x_indices] = np.arange(self.x_indices.size)
        return row

    def x_position(self, x):
        r = self._x_row[int(x)] if 0 <= int(x) < self.n_points else -1
        if r < 0:
            raise ValueError(f"point {x} is not in X")
        return int(r)

    @cached_property
    def _ball_cache(self):
        # Per X row: Y distances ascending, matching weights, and prefix
        # sums with a leading zero. Every ball measure is read from these
        # prefix sums so that annulus additivity is exact.
        order = np.argsort(self.dist_xy, axis=1, kind="stable")
        sorted_d = np.take_along_axis(self.dist_xy, order, axis=1)
        w_sorted = self.w_y[order]
        cum = np.concatenate(
            [np.zeros((order.shape[0], 1)), np.cumsum(w_sorted, axis=1)], axis=1
        )
        return sorted_d, cum

    # ---- serialization ------------------------------------------------

    def to_dict(self):
        out = {
            "weights": self.weights.tolist(),
            "x": self.x_indices.tolist(),
            "y": self.y_indices.tolist(),
        }
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        else:
            out["dist_matrix"] = self.dist.tolist()
        return out


def ball_measure(space, x, r, closed=False):
    """Weight of the ball around the X point x.

    Open convention by default: points with d(x, y) < r count, so r = 0
    gives 0. With closed=True the cut is d <= r.
    """
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    row = space.x_position(x)
    sorted_d, cum = space._ball_cache
    side = "right" if closed else "left"
    k = int(np.searchsorted(sorted_d[row], r, side=side))
    return float(cum[row, k])


def ball_measure_grid(space, r_values, closed=False):
    """Ball measures for every X point at every radius, shape (nx, nr)."""
    r_values = np.asarray(r_values, dtype=np.float64)
    sorted_d, cum = space._ball_cache
    side = "right" if closed else "left"
    out = np.empty((sorted_d.shape[0], r_values.size))
    for i in range(sorted_d.shape[0]):
        out[i] = cum[i, np.searchsorted(sorted_d[i], r_values, side=side)]
    return out


@dataclass
class RegularityReport:
    """Result of an upper regularity scan at a fixed exponent."""

    upsilon: float
    c_upper: float | None
    c_strong: float | None
    r_range: tuple[float, float]
    n_dropped: int
    r_values: np.ndarray
    per_r_max: np.ndarray
    trend_exponent: float | None
    samples: dict

    def to_dict(self):
        return {
            "upsilon": self.upsilon,
            "c_upper": self.c_upper,
            "c_strong": self.c_strong,
            "r_range": list(self.r_range),
            "n_dropped": self.n_dropped,
            "r_values": self.r_values.tolist(),
            "per_r_max": self.per_r_max.tolist(),
            "trend_exponent": self.trend_exponent,
        }

    def sample_rows(self):
        keys = list(self.samples)
        for vals in zip(*(self.samples[k] for k in keys)):
            yield dict(zip(keys, (v.item() if hasattr(v, "item") else v for v in vals)))


def _clip_grid(space, r_grid):
    r = np.asarray(r_grid, dtype=np.float64).ravel()
    if r.size == 0:
        raise ValueError("radius grid is empty")
    keep = r >= space.h_min
    if not np.any(keep):
        raise ValueError("every radius lies below the mesh size h_min")
    return np.sort(r[keep]), int(r.size - keep.sum())


def default_r_grid(space, n=16, r_max=None):
    """Geometric grid from the mesh size up to the diameter."""
    hi = space.diameter if r_max is None else r_max
    lo = space.h_min
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def estimate_upper_ahlfors(space, upsilon, r_grid=None):
    """Estimate the upper regularity constant sup ball(x, r) / r^upsilon.

    Parameters
    ----------
    space : DiscreteSpace
    upsilon : float
        Candidate regularity exponent, positive.
    r_grid : array_like, optional
        Radii to scan; entries below h_min are dropped. Defaults to a
        geometric grid from h_min to the diameter.

    Returns
    -------
    RegularityReport
        c_upper is the max ratio over sampled (x, r). trend_exponent is
        the log-log slope of the per-radius max ratio; a markedly
        negative slope means the ratio is blowing up as r shrinks and
        the exponent upsilon is too large for this space.
    """
    if upsilon <= 0.0:
        raise ValueError("upsilon must be positive")
    if r_grid is None:
        r_grid = default_r_grid(space)
    r, dropped = _clip_grid(space, r_grid)
    measures = ball_measure_grid(space, r)
    ratios = measures / r[None, :] ** upsilon
    per_r = ratios.max(axis=0)
    trend = None
    if r.size >= 2 and np.all(per_r > 0.0):
        trend = float(np.polyfit(np.log(r), np.log(per_r), 1)[0])
    nx = measures.shape[0]
    samples = {
        "x": np.repeat(space.x_indices, r.size),
        "r": np.tile(r, nx),
        "measure": measures.ravel(),
        "ratio": ratios.ravel(),
    }
    return RegularityReport(
        upsilon=float(upsilon),
        c_upper=float(ratios.max()),
        c_strong=None,
        r_range=(float(r[0]), float(r[-1])),
        n_dropped=dropped,
        r_values=r,
        per_r_max=per_r,
        trend_exponent=trend,
        samples=samples,
    )


def estimate_strong_upper_ahlfors(space, upsilon, r_pairs=None):
    """Estimate the annulus constant sup (ball(r2) - ball(r1)) / (r2^u - r1^u).

    r_pairs is an iterable of (r1, r2) with 0 <= r1 < r2; the default
    takes consecutive pairs of the default radius grid together with
    (0, r) for each grid radius. Annulus masses are differences of the
    cached prefix sums, so additivity against ball_measure is exact.
    """
    if upsilon <= 0.0:
        raise ValueError("upsilon must be positive")
    if r_pairs is None:
        g = default_r_grid(space)
        r_pairs = [(0.0, float(r)) for r in g] + list(zip(g[:-1], g[1:]))
    pairs = np.asarray([(float(a), float(b)) for a, b in r_pairs], dtype=np.float64)
    if pairs.size == 0:
        raise ValueError("r_pairs is empty")
    if np.any(pairs[:, 0] < 0.0) or np.any(pairs[:, 0] >= pairs[:, 1]):
        raise ValueError("pairs must satisfy 0 <= r1 < r2")
    lo = ball_measure_grid(space, pairs[:, 0])
    hi = ball_measure_grid(space, pairs[:, 1])
    annuli = hi - lo
    denom = pairs[:, 1] ** upsilon - pairs[:, 0] ** upsilon
    ratios = annuli / denom[None, :]
    per_pair = ratios.max(axis=0)
    trend = None
    widths = pairs[:, 1]
    if pairs.shape[0] >= 2 and np.all(per_pair > 0.0):
        trend = float(np.polyfit(np.log(widths), np.log(per_pair), 1)[0])
    nx = annuli.shape[0]
    samples = {
        "x": np.repeat(space.x_indices, pairs.shape[0]),
        "r1": np.tile(pairs[:, 0], nx),
        "r2": np.tile(pairs[:, 1], nx),
        "annulus": annuli.ravel(),
        "ratio": ratios.ravel(),
    }
    return RegularityReport(
        upsilon=float(upsilon),
        c_upper=None,
        c_strong=float(ratios.max()),
        r_range=(float(pairs.min()), float(pairs.max())),
        n_dropped=0,
        r_values=widths,
        per_r_max=per_pair,
        trend_exponent=trend,
        samples=samples,
    )


def ahlfors_constant_all_radii(space, upsilon, exclude_center=True):
    """Tight regularity constant over every radius, not just a grid.

    For a discrete measure the ratio ball(x, r) / r^upsilon is piecewise
    monotone between the sorted distances, so its sup over all r > 0 is
    attained at the distances themselves with the closed-ball mass. This
    constant certifies ball(x, r) <= c r^upsilon for every r, which is
    what the integral bound checks in singint.bounds require. With
    exclude_center=True the atom at x itself is not counted, matching
    integrals that omit the singular diagonal.
    """
    if upsilon <= 0.0:
        raise ValueError("upsilon must be positive")
    best = 0.0
    for row in range(space.x_indices.size):
        d = space.dist_xy[row]
        w = space.w_y
        if exclude_center:
            keep = d > 0.0
            d = d[keep]
            w = w[keep]
        if d.size == 0:
            continue
        order = np.argsort(d, kind="stable")
        d = d[order]
        w = w[order]
        cum = np.cumsum(w)
        # closed-ball mass at each distinct distance: last index of a tie run
        last = np.r_[d[1:] != d[:-1], True]
        d_last = d[last]
        cum_last = cum[last]
        pos = d_last > 0.0
        if np.any(pos):
            ratios = cum_last[pos] / d_last[pos] ** upsilon
            best = max(best, float(ratios.max()))
    return best


@dataclass
class SphereConditionReport:
    """Whether every X point sees a partner at each prescribed distance."""

    tolerance: float
    rho_values: np.ndarray
    rho_pass: np.ndarray
    worst_gap_per_x: np.ndarray
    a_estimate: float
    passed: bool

    def to_dict(self):
        return {
            "tolerance": self.tolerance,
            "rho_values": self.rho_values.tolist(),
            "rho_pass": self.rho_pass.tolist(),
            "worst_gap_per_x": self.worst_gap_per_x.tolist(),
            "a_estimate": self.a_estimate,
            "passed": self.passed,
        }


def check_sphere_condition(space, rho_grid, tolerance=None):
    """Check that every radius in rho_grid is realized from every X point.

    A radius rho passes at x1 when some other x2 in X has
    |d(x1, x2) - rho| <= tolerance. The tolerance is an absolute distance
    and defaults to 1.5 h_min, one and a half mesh widths. The a_estimate
    is the largest grid prefix on which every X point passes. A
    single-point X fails every radius.
    """
    rho = np.sort(np.asarray(rho_grid, dtype=np.float64).ravel())
    if rho.size == 0:
        raise ValueError("rho grid is empty")
    if np.any(rho <= 0.0):
        raise ValueError("rho values must be positive")
    if tolerance is None:
        tolerance = 1.5 * space.h_min
    dxx = space.dist_xx.copy()
    np.fill_diagonal(dxx, np.inf)
    gaps = np.abs(dxx[:, :, None] - rho[None, None, :]).min(axis=1)
    pass_x = gaps <= tolerance
    rho_pass = pass_x.all(axis=0)
    failing = np.flatnonzero(~rho_pass)
    if failing.size == 0:
        a_est = float(rho[-1])
    elif failing[0] == 0:
        a_est = 0.0
    else:
        a_est = float(rho[failing[0] - 1])
    return SphereConditionReport(
        tolerance=float(tolerance),
        rho_values=rho,
        rho_pass=rho_pass,
        worst_gap_per_x=gaps.max(axis=1),
        a_estimate=a_est,
        passed=bool(rho_pass.all()),
    )


# ---- file format and stock spaces -------------------------------------

_SPACE_KEYS = {"coords", "dist_matrix", "weights", "x", "y"}


def load_space(path):
    """Read a space from the JSON file format.

    The object holds either "coords" or "dist_matrix", plus "weights" and
    optional index lists "x" and "y" (default: all points).
    """
    with open(path) as fh:
        data = json.load(fh)
    unknown = set(data) - _SPACE_KEYS
    if unknown:
        raise ValueError(f"unknown keys in space file: {sorted(unknown)}")
    if ("coords" in data) == ("dist_matrix" in data):
        raise ValueError("space file needs exactly one of coords or dist_matrix")
    if "weights" not in data:
        raise ValueError("space file is missing weights")
    weights = np.asarray(data["weights"], dtype=np.float64)
    n = weights.size
    x = data.get("x", list(range(n)))
    y = data.get("y", list(range(n)))
    if "coords" in data:
        return DiscreteSpace.from_coords(data["coords"], weights, x, y)
    return DiscreteSpace.from_matrix(data["dist_matrix"], weights, x, y)


def save_space(space, path):
    with open(path, "w") as fh:
        json.dump(space.to_dict(), fh)


def two_point_space(separation=1.0):
    dist = np.array([[0.0, separation], [separation, 0.0]])
    return DiscreteSpace(dist, np.ones(2), np.arange(2), np.arange(2))


def cantor_space(level=5):
    """Midpoints of the level-k middle-thirds construction, mass 2^-k each.

    The natural regularity exponent of this measure is log 2 / log 3.
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    starts = np.array([0.0])
    length = 1.0
    for _ in range(level):
        length /= 3.0
        starts = np.concatenate([starts, starts + 2.0 * length])
    starts.sort()
    mids = starts + length / 2.0
    weights = np.full(mids.size, 0.5 ** level)
    return DiscreteSpace.from_coords(mids[:, None], weights)


def random_cloud(n, dim=2, seed=0):
    rng = np.random.default_rng(seed)
    coords = rng.random((n, dim))
    weights = rng.random(n) + 0.5
    return DiscreteSpace.from_coords(coords, weights)


def snowflake(space, epsilon):
    """Replace the metric by d^epsilon, 0 < epsilon <= 1."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    return DiscreteSpace(
        space.dist ** epsilon,
        space.weights,
        space.x_indices,
        space.y_indices,
        None,
    )
