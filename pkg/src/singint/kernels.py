"""Kernel gallery, kernel-class norms, and truncated maximal functions.

A kernel K(x, y) lives on X x Y minus the diagonal. Its class is measured
by three exponents: s1 controls size, d^s1 |K| bounded; (s2, s3) control
smoothness in x, d(x1, y)^s2 |K(x1, y) - K(x2, y)| <= c d(x1, x2)^s3 for
y outside the ball of radius 2 d(x1, x2) around x1. The stronger class
additionally asks the truncated tail integrals to stay bounded over all
truncation radii, which is what the maximal-function profile samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _accel

__all__ = [
    "KernelSpec",
    "MaximalFunctionProfile",
    "GrowthFit",
    "riesz",
    "signed_riesz",
    "log_blowup",
    "double_layer_circle",
    "kernel_by_name",
    "kernel_matrix",
    "kernel_size_norm",
    "kernel_smoothness_norm",
    "kernel_norm",
    "kernel_norm_with_tail",
    "maximal_function",
    "fit_growth_laws",
    "circle_tail_riesz1",
    "circle_tail_constant",
    "BOUNDED_EXPONENT_TOL",
]

# A profile counts as bounded when its fitted power exponent is this small.
BOUNDED_EXPONENT_TOL = 0.1


@dataclass(frozen=True)
class KernelSpec:
    """A kernel with its class exponents.

    evaluate(space, xi, yj) takes arrays of global point indices that
    broadcast against each other and returns kernel values; values at
    coincident pairs are discarded, so dividing by zero there is fine.
    analytic_maximal, when present, maps a truncation radius to the known
    continuum tail integral value (the same for every x), used as a test
    oracle.
    """

    name: str
    evaluate: Callable
    s1: float
    s2: float
    s3: float
    analytic_maximal: Callable | None = None

    def with_exponents(self, s1=None, s2=None, s3=None):
        return replace(
            self,
            s1=self.s1 if s1 is None else float(s1),
            s2=self.s2 if s2 is None else float(s2),
            s3=self.s3 if s3 is None else float(s3),
        )

    def with_analytic(self, fn):
        return replace(self, analytic_maximal=fn)

    def scaled(self, factor):
        inner = self.evaluate
        return replace(
            self,
            name=f"{factor}*{self.name}",
            evaluate=lambda space, xi, yj: factor * inner(space, xi, yj),
            analytic_maximal=None,
        )


def _distance_kernel(name, fn, s1, s2, s3):
    def evaluate(space, xi, yj):
        return fn(space.dist[xi, yj])

    return KernelSpec(name=name, evaluate=evaluate, s1=s1, s2=s2, s3=s3)


def riesz(s):
    """Inverse-power kernel d^-s. Standard smoothness: s2 = s + 1, s3 = 1."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    return _distance_kernel(f"riesz[s={s}]", lambda d: d ** (-s), s, s + 1.0, 1.0)


def log_blowup(upsilon):
    """d^-upsilon with positive sign.

    At the critical exponent the truncated tails grow like |log r|, so
    this kernel sits outside the tail-bounded class on any fixed sample.
    """
    if upsilon <= 0.0:
        raise ValueError("upsilon must be positive")
    return _distance_kernel(
        f"log_blowup[upsilon={upsilon}]",
        lambda d: d ** (-upsilon),
        upsilon,
        upsilon + 1.0,
        1.0,
    )


def signed_riesz(s):
    """d^-s with an orientation sign, odd under reflection through x.

    Needs 2-d coordinates; the sign is that of the cross product of the
    position vectors, so on a centered circle the two arcs around x get
    opposite signs and the tails cancel exactly on symmetric samples.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")

    def evaluate(space, xi, yj):
        if space.coords is None or space.coords.shape[1] != 2:
            raise ValueError("signed_riesz needs 2-d coordinates")
        px = space.coords[xi]
        py = space.coords[yj]
        cross = px[..., 0] * py[..., 1] - px[..., 1] * py[..., 0]
        return np.sign(cross) * space.dist[xi, yj] ** (-s)

    return KernelSpec(
        name=f"signed_riesz[s={s}]", evaluate=evaluate, s1=s, s2=s + 1.0, s3=1.0
    )


def double_layer_circle(radius=1.0):
    """Normal-derivative kernel of the 2-d log potential on a circle.

    On the centered circle of the given radius the normal component
    (y - x) . n(y) equals |y - x|^2 / (2 radius), so the geometric ratio
    collapses to the constant 1 / (4 pi radius). The evaluator uses the
    collapsed form: computing the inner product from sampled coordinates
    instead would lose about eps / d^2 relative accuracy at the closest
    pairs, since the samples sit a rounding error off the true circle.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    def evaluate(space, xi, yj):
        if space.coords is None or space.coords.shape[1] != 2:
            raise ValueError("double_layer_circle needs 2-d coordinates")
        shape = np.broadcast_shapes(np.shape(xi), np.shape(yj))
        return np.full(shape, 1.0 / (4.0 * np.pi * radius))

    return KernelSpec(
        name=f"double_layer_circle[R={radius}]",
        evaluate=evaluate,
        s1=1.0,
        s2=2.0,
        s3=1.0,
        analytic_maximal=lambda r: circle_tail_constant(r, radius),
    )


def circle_tail_constant(r, radius=1.0):
    """Tail integral of the constant 1/(4 pi R) kernel on a circle of radius R."""
    r = np.asarray(r, dtype=np.float64)
    arc = np.where(r < 2.0 * radius, 4.0 * radius * np.arcsin(np.clip(r / (2.0 * radius), 0.0, 1.0)), 2.0 * np.pi * radius)
    out = (2.0 * np.pi * radius - arc) / (4.0 * np.pi * radius)
    return float(out) if out.ndim == 0 else out


def circle_tail_riesz1(r, radius=1.0):
    """Closed-form tail integral of d^-1 over the unit-weight circle of radius R.

    Integrating arclength over the chordal complement of B(x, r) gives
    -2 log tan(arcsin(r / (2 R)) / 2), independent of x.
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0.0) or np.any(r >= 2.0 * radius):
        raise ValueError("radius arguments must lie in (0, diameter)")
    out = -2.0 * np.log(np.tan(np.arcsin(r / (2.0 * radius)) / 2.0))
    return float(out) if out.ndim == 0 else out


_GALLERY = {
    "riesz": riesz,
    "signed_riesz": signed_riesz,
    "log_blowup": log_blowup,
    "double_layer": double_layer_circle,
}


def kernel_by_name(name, **params):
    """Gallery lookup used by the command line."""
    if name not in _GALLERY:
        raise ValueError(f"unknown kernel {name!r}; choices: {sorted(_GALLERY)}")
    try:
        return _GALLERY[name](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for kernel {name!r}: {exc}") from exc


def kernel_matrix(space, kernel):
    """Kernel values on X x Y with zeros at coincident pairs."""
    xi = space.x_indices[:, None]
    yj = space.y_indices[None, :]
    mask = space.dist_xy > 0.0
    values = np.zeros(space.dist_xy.shape, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.asarray(kernel.evaluate(space, xi, yj), dtype=np.complex128)
    values[mask] = np.broadcast_to(raw, values.shape)[mask]
    if not np.all(np.isfinite(values[mask])):
        raise ValueError(f"kernel {kernel.name} is not finite off the diagonal")
    if np.all(values.imag == 0.0):
        return np.ascontiguousarray(values.real)
    return values


def kernel_size_norm(space, kernel, kmat=None):
    """Sup of d(x, y)^s1 |K(x, y)| over off-diagonal pairs."""
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    mask = space.dist_xy > 0.0
    if not np.any(mask):
        return 0.0
    vals = space.dist_xy[mask] ** kernel.s1 * np.abs(kmat[mask])
    return float(vals.max())


def kernel_smoothness_norm(space, kernel, kmat=None):
    """Sup of d(x1, y)^s2 |K(x1, y) - K(x2, y)| / d(x1, x2)^s3.

    The sup runs over distinct x1, x2 in X and y in Y separated from x1
    by at least twice d(x1, x2). This is the cubic scan; it dispatches to
    the compiled core when available.
    """
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    return _accel.smoothness_scan(
        space.dist_xx, space.dist_xy, kmat, kernel.s2, kernel.s3
    )


def kernel_norm(space, kernel, kmat=None):
    """Size part plus smoothness part."""
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    return kernel_size_norm(space, kernel, kmat) + kernel_smoothness_norm(
        space, kernel, kmat
    )


@dataclass
class GrowthFit:
    """Two-model fit of a positive profile against the truncation radius.

    The power model is fit by least squares of log v on log r; its
    exponent is the slope (negative means growth toward r = 0). The log
    model is a linear fit of v against |log r|; its slope is the
    coefficient of the |log r| law. Both models are scored by R^2 against
    the profile in linear scale so the scores are comparable; law picks
    the better one, or "both" inside a tie band of 0.02, or "flat" when
    the profile varies by under five percent.
    """

    power_exponent: float
    power_amplitude: float
    power_r2: float
    log_coefficient: float
    log_intercept: float
    log_r2: float
    law: str
    delta_r2: float
    bounded: bool

    def to_dict(self):
        return {
            "power_exponent": self.power_exponent,
            "power_amplitude": self.power_amplitude,
            "power_r2": self.power_r2,
            "log_coefficient": self.log_coefficient,
            "log_intercept": self.log_intercept,
            "log_r2": self.log_r2,
            "law": self.law,
            "delta_r2": self.delta_r2,
            "bounded": self.bounded,
        }


def _r_squared(values, predicted):
    resid = values - predicted
    total = values - values.mean()
    denom = float(total @ total)
    if denom == 0.0:
        return 1.0 if float(resid @ resid) == 0.0 else 0.0
    return 1.0 - float(resid @ resid) / denom


def fit_growth_laws(r_values, profile, tie_band=0.02):
    """Fit power and log growth laws to a positive profile.

    Returns None when fewer than three radii carry a positive value;
    there is nothing to fit then.
    """
    r = np.asarray(r_values, dtype=np.float64)
    v = np.asarray(profile, dtype=np.float64)
    keep = v > 0.0
    if keep.sum() < 3:
        return None
    r = r[keep]
    v = v[keep]
    log_r = np.log(r)
    slope, intercept = np.polyfit(log_r, np.log(v), 1)
    power_pred = np.exp(intercept + slope * log_r)
    power_r2 = _r_squared(v, power_pred)
    absl = np.abs(log_r)
    lcoef, lint = np.polyfit(absl, v, 1)
    log_pred = lint + lcoef * absl
    log_r2 = _r_squared(v, log_pred)
    spread = (v.max() - v.min()) <= 0.05 * v.max()
    delta = log_r2 - power_r2
    if spread:
        law = "flat"
    elif abs(delta) < tie_band:
        law = "both"
    else:
        law = "log" if delta > 0 else "power"
    return GrowthFit(
        power_exponent=float(slope),
        power_amplitude=float(np.exp(intercept)),
        power_r2=float(power_r2),
        log_coefficient=float(lcoef),
        log_intercept=float(lint),
        log_r2=float(log_r2),
        law=law,
        delta_r2=float(delta),
        bounded=bool(abs(slope) <= BOUNDED_EXPONENT_TOL),
    )


@dataclass
class MaximalFunctionProfile:
    """Truncated tail integrals per X point and truncation radius.

    values[i, j] is the weighted sum of K(x_i, y) over y at distance at
    least r_j from x_i. sup_per_r is the max of |values| over x; sup is
    the global max; fit is a GrowthFit of sup_per_r or None.
    """

    r_values: np.ndarray
    values: np.ndarray
    sup_per_r: np.ndarray
    sup: float
    fit: GrowthFit | None

    @property
    def bounded(self):
        return self.fit.bounded if self.fit is not None else True

    def to_dict(self, include_values=False):
        out = {
            "r_values": self.r_values.tolist(),
            "sup_per_r": self.sup_per_r.tolist(),
            "sup": self.sup,
            "fit": self.fit.to_dict() if self.fit is not None else None,
            "bounded": self.bounded,
        }
        if include_values:
            out["values_real"] = self.values.real.tolist()
            if np.any(self.values.imag != 0.0):
                out["values_imag"] = self.values.imag.tolist()
        return out


def maximal_function(space, kernel, r_grid, kmat=None):
    """Sample the truncated tail integrals over a radius grid.

    For each x in X and each r the tail is sum of w(y) K(x, y) over
    d(x, y) >= r. Sums accumulate from the farthest point inward, so for
    kernels with nonnegative real part the real profile is exactly
    nonincreasing in r. Radii below the mesh floor are dropped.
    """
    from .space import _clip_grid

    r, _ = _clip_grid(space, r_grid)
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    order = np.argsort(space.dist_xy, axis=1, kind="stable")
    sorted_d = np.take_along_axis(space.dist_xy, order, axis=1)
    wk = np.take_along_axis(kmat * space.w_y[None, :], order, axis=1)
    # suffix[i, k] = sum of wk[i, k:]; built by a reversed cumulative sum
    suffix = np.zeros((wk.shape[0], wk.shape[1] + 1), dtype=np.complex128)
    suffix[:, :-1] = np.cumsum(wk[:, ::-1], axis=1)[:, ::-1]
    nx = wk.shape[0]
    values = np.empty((nx, r.size), dtype=np.complex128)
    for i in range(nx):
        values[i] = suffix[i, np.searchsorted(sorted_d[i], r, side="left")]
    if np.all(values.imag == 0.0):
        values = values.real
    sup_per_r = np.abs(values).max(axis=0)
    fit = fit_growth_laws(r, sup_per_r)
    return MaximalFunctionProfile(
        r_values=r,
        values=values,
        sup_per_r=sup_per_r,
        sup=float(sup_per_r.max()),
        fit=fit,
    )


def kernel_norm_with_tail(space, kernel, r_grid, kmat=None):
    """Kernel norm plus the sampled sup of the truncated tails.

    Finiteness of this quantity under refinement is membership in the
    tail-bounded kernel class; the profile's growth fit is the sampled
    divergence diagnostic.
    """
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    profile = maximal_function(space, kernel, r_grid, kmat=kmat)
    return kernel_norm(space, kernel, kmat) + profile.sup
