"""Moduli of continuity, sampled functions, and Hölder-type norms.

A modulus is an increasing function omega with omega(0) = 0 that controls
oscillation through |f(x) - f(y)| <= C omega(d(x, y)). Plain powers r^alpha
give the classical Hölder scale; the capped log-power variant r^theta |ln r|
covers the borderline smoothing case where a plain power is not enough.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _accel

__all__ = [
    "Modulus",
    "Power",
    "LogPower",
    "MaxOf",
    "MinExp",
    "SampledFunction",
    "modulus_eval",
    "holder_seminorm",
    "holder_norm_b",
    "target_modulus_for_case",
    "classify_smoothing_case",
    "embedding_constant",
]


class Modulus:
    """Base class; subclasses implement _eval on positive float arrays."""

    name = "modulus"

    def __call__(self, r):
        arr = np.asarray(r, dtype=np.float64)
        if np.any(arr < 0.0):
            raise ValueError("modulus arguments must be nonnegative")
        out = np.zeros_like(arr)
        pos = arr > 0.0
        if np.any(pos):
            out[pos] = self._eval(arr[pos])
        return float(out) if np.isscalar(r) or arr.ndim == 0 else out

    def _eval(self, r):
        raise NotImplementedError

    def params(self):
        return {}

    def to_dict(self):
        return {"name": self.name, **self.params()}

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


class Power(Modulus):
    """omega(r) = r^alpha with alpha in (0, 1]."""

    name = "power"

    def __init__(self, alpha):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = float(alpha)

    def _eval(self, r):
        return r ** self.alpha

    def params(self):
        return {"alpha": self.alpha}


class LogPower(Modulus):
    """omega(r) = r^theta |ln r| capped at its maximum.

    The cap sits at r_cap = exp(-1/theta), where r^theta |ln r| peaks;
    beyond it the modulus stays at the plateau value exp(-1)/theta. The
    result is increasing and concave with omega(0) = 0.
    """

    name = "log_power"

    def __init__(self, theta):
        if not 0.0 < theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        self.theta = float(theta)
        self.r_cap = math.exp(-1.0 / self.theta)
        self.plateau = math.exp(-1.0) / self.theta

    def _eval(self, r):
        out = np.full_like(r, self.plateau)
        low = r <= self.r_cap
        # below the cap r < 1, so |ln r| = -ln r
        out[low] = r[low] ** self.theta * (-np.log(r[low]))
        return out

    def params(self):
        return {"theta": self.theta}


class MaxOf(Modulus):
    """Pointwise maximum of two moduli."""

    name = "max_of"

    def __init__(self, first, second):
        self.first = first
        self.second = second

    def __call__(self, r):
        return np.maximum(self.first(r), self.second(r))

    def params(self):
        return {"first": self.first.to_dict(), "second": self.second.to_dict()}


class MinExp(Modulus):
    """Power modulus at the smaller of two exponents.

    Records both candidate exponents so reports can show which one was
    binding.
    """

    name = "min_exp"

    def __init__(self, alpha, gamma):
        if alpha <= 0.0 or gamma <= 0.0:
            raise ValueError("both exponents must be positive")
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.exponent = min(self.alpha, self.gamma)

    def _eval(self, r):
        return r ** self.exponent

    def params(self):
        return {"alpha": self.alpha, "gamma": self.gamma, "exponent": self.exponent}


def modulus_eval(modulus, r):
    """Evaluate a modulus on a scalar or array of radii."""
    return modulus(r)


@dataclass(frozen=True)
class SampledFunction:
    """Values attached to a subset of a space's points.

    indices are positions in the global point list; values may be real or
    complex. The pairing is positional.
    """

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        vals = np.asarray(self.values).ravel()
        if idx.size != vals.size:
            raise ValueError("indices and values must have equal length")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct")
        if not np.iscomplexobj(vals):
            vals = vals.astype(np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        idx.setflags(write=False)
        vals.setflags(write=False)

    @classmethod
    def from_callable(cls, space, fn, domain=None):
        """Sample fn over coordinates of the given point indices."""
        if space.coords is None:
            raise ValueError("space has no coordinates to evaluate on")
        if domain is None:
            domain = np.union1d(space.x_indices, space.y_indices)
        domain = np.asarray(domain, dtype=np.int64)
        return cls(domain, np.asarray(fn(space.coords[domain])))

    def validate_for(self, space):
        if self.indices.size and (
            self.indices.min() < 0 or self.indices.max() >= space.n_points
        ):
            raise ValueError("function indices fall outside the space")

    def values_at(self, indices):
        """Values at the given global indices; missing points raise KeyError."""
        indices = np.asarray(indices, dtype=np.int64)
        lookup = {int(g): k for k, g in enumerate(self.indices)}
        try:
            pos = np.array([lookup[int(g)] for g in indices.ravel()], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"function has no value at point {exc.args[0]}") from None
        return self.values[pos].reshape(indices.shape)


def _inverse_omega(modulus, dist):
    om = modulus(dist)
    inv = np.zeros_like(om)
    positive = om > 0.0
    inv[positive] = 1.0 / om[positive]
    inv[dist == 0.0] = 0.0
    return inv


def holder_seminorm(f, modulus, space):
    """Sampled seminorm sup |f(p) - f(q)| / omega(d(p, q)) over domain pairs.

    Pairs at distance zero are excluded. A single-point domain has no
    pairs; that returns 0 with a warning. Sampled values are lower bounds
    for the continuum seminorm.
    """
    f.validate_for(space)
    if f.indices.size < 2:
        warnings.warn("seminorm over fewer than two points is zero", stacklevel=2)
        return 0.0
    dist = space.dist[np.ix_(f.indices, f.indices)]
    inv = _inverse_omega(modulus, dist)
    return float(_accel.pair_ratio_max_many(f.values[None, :], inv)[0])


def holder_norm_b(f, modulus, space):
    """Bounded Hölder norm: sup |f| plus the sampled seminorm."""
    sup = float(np.abs(f.values).max()) if f.indices.size else 0.0
    if f.indices.size < 2:
        return sup
    return sup + holder_seminorm(f, modulus, space)


def classify_smoothing_case(beta, upsilon, s2, s3, tol=1e-12):
    """Trichotomy of the smoothness excess s2 - beta against upsilon.

    Returns "supercritical" (s2 - beta > upsilon), "critical" (equal up
    to tol), or "subcritical". Parameter ranges are validated here so the
    callers can assume them.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if not 0.0 < s3 <= 1.0:
        raise ValueError("s3 must lie in (0, 1]")
    if upsilon <= 0.0:
        raise ValueError("upsilon must be positive")
    if s2 < beta:
        raise ValueError("s2 must be at least beta")
    gap = s2 - beta
    if abs(gap - upsilon) <= tol:
        return "critical"
    return "supercritical" if gap > upsilon else "subcritical"


def target_modulus_for_case(beta, upsilon, s2, s3, tol=1e-12):
    """Target-space modulus for the smoothing map at the given parameters.

    supercritical: power of min(beta, upsilon + s3 + beta - s2), which
    requires s2 < upsilon + beta + s3 to stay positive. critical: max of
    r^beta and the capped log-power at s3. subcritical: power of
    min(beta, s3).
    """
    case = classify_smoothing_case(beta, upsilon, s2, s3, tol=tol)
    if case == "critical":
        return MaxOf(Power(beta), LogPower(s3))
    if case == "supercritical":
        residual = upsilon + s3 + beta - s2
        if residual <= tol:
            raise ValueError(
                "supercritical parameters need s2 < upsilon + beta + s3"
            )
        return MinExp(beta, residual)
    return MinExp(beta, s3)


def embedding_constant(m_from, m_to, distances):
    """Smallest C with m_from(d) <= C m_to(d) on the sampled distances.

    Feeding a function's seminorm in m_from through this constant bounds
    its seminorm in m_to on the same sample.
    """
    d = np.asarray(distances, dtype=np.float64).ravel()
    d = d[d > 0.0]
    if d.size == 0:
        raise ValueError("no positive distances supplied")
    num = m_from(d)
    den = m_to(d)
    if np.any(den <= 0.0):
        raise ValueError("target modulus vanishes on a positive distance")
    return float((num / den).max())
