"""Sampled manifolds, tangential gradients, and surface-kernel experiments.

A ParametrizedManifold is a quadrature sample of a curve or surface in
Euclidean space together with, at every node, an orthonormal tangent
frame and a local chart whose parameter is arclength to second order.
That is enough to form tangential gradients of node data by central
differences in the chart, with no mesh connectivity.

The main identity verified here moves a tangential gradient through a
singular integral:

    grad ∫ K(x, y) mu(y) dnu(y)
        = ∫ grad_x K(x, y) (mu(y) - mu(x)) dnu(y)
          + mu(x) grad ∫ K(x, y) dnu(y),

where grad is the surface gradient in x. The subtraction in the first
term tames the kernel singularity and the second term carries the
remaining principal part. Both outer gradients are discretized with the
same difference operator, so the identity is exact for constant mu and
converges under refinement otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .holder import modulus_eval
from .kernels import KernelSpec, fit_growth_laws, maximal_function
from .operator import (
    HypothesisError,
    case_select,
    default_test_family,
    necessity_r_grid,
    operator_norm_lower_bound,
)
from .space import DiscreteSpace, check_sphere_condition

__all__ = [
    "ParametrizedManifold",
    "build_circle",
    "build_sphere",
    "to_space",
    "AmbientFunction",
    "tangential_gradient",
    "GradKernelSpec",
    "single_layer_log",
    "grad_riesz",
    "grad_kernel_by_name",
    "ManifoldGradientReport",
    "verify_gradient_formula",
    "ManifoldNecessityReport",
    "manifold_necessity",
]


@dataclass(frozen=True)
class ParametrizedManifold:
    """Quadrature nodes on a manifold with frames and local charts.

    chart(indices, u) maps chart parameters u, one row per index, to
    ambient points; the parameter is arclength at the node to second
    order and the frame columns are the images of the parameter axes.
    fd_step is the default half-mesh step for central differences.
    """

    name: str
    coords: np.ndarray
    weights: np.ndarray
    frames: np.ndarray
    chart: Callable
    dimension: int
    fd_step: float
    normals: np.ndarray | None = None

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def ambient_dim(self):
        return self.coords.shape[1]

    def tangent_projectors(self):
        """Per-node orthogonal projector onto the tangent space."""
        return np.einsum("iad,iae->ide", self.frames, self.frames)


def build_circle(n, radius=1.0):
    """Uniform nodes on a centered circle, chart by arclength."""
    if n < 3:
        raise ValueError("need at least three nodes")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    theta = 2.0 * np.pi * np.arange(n) / n
    coords = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    frames = np.stack([-np.sin(theta), np.cos(theta)], axis=1)[:, None, :]
    weights = np.full(n, 2.0 * np.pi * radius / n)

    def chart(indices, u):
        u = np.asarray(u, dtype=np.float64)
        angle = theta[indices] + u[..., 0] / radius
        return radius * np.stack([np.cos(angle), np.sin(angle)], axis=-1)

    return ParametrizedManifold(
        name=f"circle[n={n},R={radius}]",
        coords=coords,
        weights=weights,
        frames=frames,
        chart=chart,
        dimension=1,
        fd_step=np.pi * radius / n,
        normals=coords / radius,
    )


def build_sphere(n, radius=1.0):
    """Spiral nodes on a centered sphere, chart by radial projection.

    Nodes follow the golden-angle spiral with equal-area weights; the
    chart pushes a tangent displacement back to the sphere along the
    ray from the center, which preserves arclength to second order.
    """
    if n < 4:
        raise ValueError("need at least four nodes")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    i = np.arange(n)
    z = 1.0 - 2.0 * (i + 0.5) / n
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    rho = np.sqrt(1.0 - z * z)
    unit = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    coords = radius * unit
    weights = np.full(n, 4.0 * np.pi * radius * radius / n)
    ref = np.zeros_like(unit)
    ref[:, 2] = 1.0
    near_pole = np.abs(unit[:, 2]) > 0.9
    ref[near_pole] = [1.0, 0.0, 0.0]
    e1 = np.cross(ref, unit)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(unit, e1)
    frames = np.stack([e1, e2], axis=1)

    def chart(indices, u):
        u = np.asarray(u, dtype=np.float64)
        base = unit[indices]
        shift = (
            u[..., 0, None] * frames[indices, 0, :]
            + u[..., 1, None] * frames[indices, 1, :]
        ) / radius
        p = base + shift
        return radius * p / np.linalg.norm(p, axis=-1, keepdims=True)

    return ParametrizedManifold(
        name=f"sphere[n={n},R={radius}]",
        coords=coords,
        weights=weights,
        frames=frames,
        chart=chart,
        dimension=2,
        fd_step=radius * np.sqrt(np.pi / n),
        normals=unit,
    )


def to_space(manifold, x_indices=None, y_indices=None):
    """The manifold sample as a discrete space with the chordal metric."""
    n = manifold.n_nodes
    if x_indices is None:
        x_indices = np.arange(n)
    if y_indices is None:
        y_indices = np.arange(n)
    return DiscreteSpace.from_coords(
        manifold.coords, manifold.weights, x_indices, y_indices
    )


@dataclass(frozen=True)
class AmbientFunction:
    """Scalar field on ambient space, optionally with its gradient.

    value(points) maps (..., dim) arrays of coordinates to scalars;
    gradient, when given, maps them to (..., dim) ambient gradients and
    lets tangential gradients skip finite differences.
    """

    value: Callable
    gradient: Callable | None = None
    name: str = "field"

    def __call__(self, points):
        return np.asarray(self.value(np.asarray(points, dtype=np.float64)))


def _chart_gradient(manifold, evaluate, step=None):
    """Surface gradient of a point functional by chart central differences.

    evaluate takes a (k, dim) array of ambient points and returns k
    scalars; the result assembles per-axis derivatives in the frames.
    """
    h = manifold.fd_step if step is None else float(step)
    n = manifold.n_nodes
    idx = np.arange(n)
    grad = np.zeros((n, manifold.ambient_dim))
    for a in range(manifold.dimension):
        u = np.zeros((n, manifold.dimension))
        u[:, a] = h
        f_plus = evaluate(manifold.chart(idx, u))
        u[:, a] = -h
        f_minus = evaluate(manifold.chart(idx, u))
        grad += ((f_plus - f_minus) / (2.0 * h))[:, None] * manifold.frames[:, a, :]
    return grad


def tangential_gradient(manifold, fn, step=None):
    """Surface gradient of an ambient function at every node.

    Uses the analytic ambient gradient projected onto the tangent space
    when available, otherwise chart central differences.
    """
    if isinstance(fn, AmbientFunction) and fn.gradient is not None:
        g = np.asarray(fn.gradient(manifold.coords), dtype=np.float64)
        g = np.broadcast_to(g, manifold.coords.shape)
        return np.einsum("ide,ie->id", manifold.tangent_projectors(), g)
    evaluate = fn if not isinstance(fn, AmbientFunction) else fn.__call__
    return _chart_gradient(manifold, lambda pts: np.asarray(evaluate(pts)), step=step)


@dataclass(frozen=True)
class GradKernelSpec:
    """Ambient kernel with its x-gradient and the gradient's exponents.

    value(px, py) and grad_x(px, py) broadcast over leading axes of the
    two coordinate arrays. The exponents t1, t2, t3 describe the size
    and smoothness of the gradient kernel, which is the one the surface
    experiments feed through the class machinery.
    """

    name: str
    value: Callable
    grad_x: Callable
    t1: float
    t2: float
    t3: float


def single_layer_log():
    """Logarithmic single-layer kernel log|x - y| with its gradient."""

    def value(px, py):
        diff = px - py
        return 0.5 * np.log((diff * diff).sum(axis=-1))

    def grad_x(px, py):
        diff = px - py
        return diff / (diff * diff).sum(axis=-1)[..., None]

    return GradKernelSpec(
        name="single_layer_log", value=value, grad_x=grad_x, t1=1.0, t2=2.0, t3=1.0
    )


def grad_riesz(s):
    """Inverse-power kernel |x - y|^-s with its gradient."""
    if s <= 0.0:
        raise ValueError("s must be positive")

    def value(px, py):
        diff = px - py
        return (diff * diff).sum(axis=-1) ** (-0.5 * s)

    def grad_x(px, py):
        diff = px - py
        q = (diff * diff).sum(axis=-1)
        return -s * diff * q[..., None] ** (-0.5 * s - 1.0)

    return GradKernelSpec(
        name=f"grad_riesz[s={s}]",
        value=value,
        grad_x=grad_x,
        t1=s + 1.0,
        t2=s + 2.0,
        t3=1.0,
    )


_GRAD_GALLERY = {
    "single_layer_log": single_layer_log,
    "grad_riesz": grad_riesz,
}


def grad_kernel_by_name(name, **params):
    if name not in _GRAD_GALLERY:
        raise ValueError(
            f"unknown gradient kernel {name!r}; choices: {sorted(_GRAD_GALLERY)}"
        )
    return _GRAD_GALLERY[name](**params)


def _pair_arrays(manifold, kernel):
    """Kernel values and ambient gradients at all node pairs, zero diagonal."""
    c = manifold.coords
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.asarray(kernel.value(c[:, None, :], c[None, :, :]))
        grads = np.asarray(kernel.grad_x(c[:, None, :], c[None, :, :]))
    n = manifold.n_nodes
    di = np.arange(n)
    values[di, di] = 0.0
    grads[di, di, :] = 0.0
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(grads))):
        raise ValueError(f"kernel {kernel.name} is not finite off the diagonal")
    return values, grads


@dataclass
class ManifoldGradientReport:
    """Node-wise residual of the gradient-through-the-integral identity.

    lhs holds the differenced gradient of the full potential;
    subtracted_term the quadrature of grad_x K against mu(y) - mu(x);
    principal_term mu(x) times the differenced gradient of the kernel
    mass. residuals are Euclidean norms of lhs minus the two terms.
    """

    n_nodes: int
    fd_step: float
    lhs: np.ndarray
    subtracted_term: np.ndarray
    principal_term: np.ndarray
    residuals: np.ndarray
    max_residual: float
    max_subtracted: float

    def to_dict(self):
        return {
            "n_nodes": self.n_nodes,
            "fd_step": self.fd_step,
            "max_residual": self.max_residual,
            "max_subtracted": self.max_subtracted,
            "residuals": self.residuals.tolist(),
        }


def verify_gradient_formula(manifold, kernel, mu, step=None):
    """Check the surface-gradient identity for one kernel and density.

    Both outer gradients, of the full potential on the left and of the
    kernel mass on the right, use the same chart central differences, so
    the identity holds exactly for constant densities and the residual
    for varying densities measures pure discretization error.
    """
    mu_vals = (
        np.asarray(mu(manifold.coords), dtype=np.float64)
        if callable(mu)
        else np.asarray(mu, dtype=np.float64)
    )
    if mu_vals.shape != (manifold.n_nodes,):
        raise ValueError("mu must provide one value per node")
    w = manifold.weights
    _, grads = _pair_arrays(manifold, kernel)
    proj = manifold.tangent_projectors()
    tangential = np.einsum("ide,ije->ijd", proj, grads)
    subtracted = np.einsum(
        "j,ijd->id", w, tangential * (mu_vals[None, :, None] - mu_vals[:, None, None])
    )

    nodes = manifold.coords

    def kernel_rows(points):
        with np.errstate(divide="ignore", invalid="ignore"):
            kv = np.asarray(kernel.value(points[:, None, :], nodes[None, :, :]))
        if not np.all(np.isfinite(kv)):
            raise ValueError("displaced evaluation hit a node exactly; change step")
        return kv

    def pot_mu(points):
        return kernel_rows(points) @ (w * mu_vals)

    def pot_mass(points):
        return kernel_rows(points) @ w

    lhs = _chart_gradient(manifold, pot_mu, step=step)
    principal = mu_vals[:, None] * _chart_gradient(manifold, pot_mass, step=step)
    residual_vec = lhs - subtracted - principal
    residuals = np.linalg.norm(residual_vec, axis=1)
    return ManifoldGradientReport(
        n_nodes=manifold.n_nodes,
        fd_step=manifold.fd_step if step is None else float(step),
        lhs=lhs,
        subtracted_term=subtracted,
        principal_term=principal,
        residuals=residuals,
        max_residual=float(residuals.max()),
        max_subtracted=float(np.abs(subtracted).max()),
    )


@dataclass
class ManifoldNecessityReport:
    """Necessity diagnostics for a surface gradient kernel."""

    kernel: str
    case_tag: str
    conditions: list
    r_values: np.ndarray
    lhs: np.ndarray
    sup_lhs: float
    operator_bound: float
    safety_factor: float
    threshold: float
    verdict: str
    fit: object

    def to_dict(self):
        return {
            "kernel": self.kernel,
            "case": self.case_tag,
            "conditions": self.conditions,
            "r_values": self.r_values.tolist(),
            "lhs": self.lhs.tolist(),
            "sup_lhs": self.sup_lhs,
            "operator_bound": self.operator_bound,
            "safety_factor": self.safety_factor,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "fit": None if self.fit is None else self.fit.to_dict(),
        }


def manifold_necessity(
    manifold,
    kernel,
    beta,
    r_grid=None,
    safety_factor=10.0,
    sphere_tolerance=None,
    seed=0,
):
    """Necessity experiment for the tangential gradient of a surface kernel.

    The manifold dimension plays the regularity exponent. The gradient
    kernel's exponents must fit the surface setting: t1 equal to the
    dimension, t2 - beta above it, and t2 at most dimension + t3;
    violations raise HypothesisError naming the failed inequality. The
    scaled tail profile uses the Euclidean magnitude of the component
    tails, and the operator bound is the best component bound, a valid
    lower bound for the vector operator.
    """
    dim = float(manifold.dimension)
    conditions = [
        {
            "name": "size_matches_dimension",
            "required": f"t1 == {dim:g}",
            "passed": bool(abs(kernel.t1 - dim) <= 1e-12),
        },
        {
            "name": "smoothness_above_dimension",
            "required": f"t2 - beta > {dim:g}",
            "passed": bool(kernel.t2 - beta > dim),
        },
        {
            "name": "smoothness_within_reach",
            "required": f"t2 <= {dim:g} + t3",
            "passed": bool(kernel.t2 <= dim + kernel.t3 + 1e-12),
        },
    ]
    for cond in conditions:
        if not cond["passed"]:
            raise HypothesisError(
                f"surface necessity needs {cond['required']} "
                f"(kernel {kernel.name}, beta {beta})"
            )
    case = case_select(beta, dim, kernel.t2, kernel.t3)
    space = to_space(manifold)
    if r_grid is None:
        r_grid = necessity_r_grid(space, case)
    r = np.asarray(r_grid, dtype=np.float64)
    r = np.sort(r[(r >= space.h_min) & (r <= case.r_window)])
    if r.size == 0:
        raise HypothesisError("no grid radii inside the necessity window")
    sphere = check_sphere_condition(space, r / 2.0, tolerance=sphere_tolerance)
    if not sphere.passed:
        raise HypothesisError(
            f"sphere condition fails below rho = {sphere.a_estimate:.4g} "
            f"(tolerance {sphere.tolerance:.4g})"
        )
    _, grads = _pair_arrays(manifold, kernel)
    proj = manifold.tangent_projectors()
    tangential = np.einsum("ide,ije->ijd", proj, grads)
    component_specs = [
        KernelSpec(
            name=f"{kernel.name}[component {c}]",
            evaluate=lambda sp, xi, yj, c=c: tangential[xi, yj, c],
            s1=kernel.t1,
            s2=kernel.t2,
            s3=kernel.t3,
        )
        for c in range(manifold.ambient_dim)
    ]
    tails_sq = np.zeros((space.x_indices.size, r.size))
    family = default_test_family(space, beta, seed=seed)
    best_bound = 0.0
    for spec in component_specs:
        profile = maximal_function(space, spec, r)
        tails_sq += np.abs(profile.values) ** 2
        bound = operator_norm_lower_bound(
            space, spec, case.target, family=family
        )
        best_bound = max(best_bound, bound.value)
    magnitude = np.sqrt(tails_sq)
    scale = r**beta / modulus_eval(case.target, r)
    lhs = magnitude.max(axis=0) * scale
    sup_lhs = float(lhs.max())
    threshold = float(safety_factor * best_bound)
    return ManifoldNecessityReport(
        kernel=kernel.name,
        case_tag=case.tag,
        conditions=conditions,
        r_values=r,
        lhs=lhs,
        sup_lhs=sup_lhs,
        operator_bound=float(best_bound),
        safety_factor=float(safety_factor),
        threshold=threshold,
        verdict="satisfied" if sup_lhs <= threshold else "violation candidate",
        fit=fit_growth_laws(r, lhs),
    )
