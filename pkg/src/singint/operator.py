"""The subtracted singular-integral operator and its smoothing experiments.

The central object is the subtracted potential

    (Q g)(x) = sum_y w(y) K(x, y) (g(x) - g(y)),

the discrete form of integrating K(x, y) (g(x) - g(y)) over Y. The
subtraction makes the sum well defined for kernels too singular to
integrate against g directly, and Q annihilates constants, so operator
norms are measured seminorm to seminorm.

Two experiments probe the smoothing theory on a concrete sample:

* sufficiency: check the hypotheses (kernel class norms finite, measure
  regularity stable under refinement, tails bounded) and report the
  sampled operator norm against the predicted target modulus;
* necessity: check that the scaled truncated tails, which boundedness of
  Q forces to stay below a multiple of the operator norm, actually do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .holder import (
    Modulus,
    SampledFunction,
    _inverse_omega,
    classify_smoothing_case,
    modulus_eval,
    target_modulus_for_case,
)
from .kernels import (
    GrowthFit,
    MaximalFunctionProfile,
    fit_growth_laws,
    kernel_matrix,
    kernel_size_norm,
    kernel_smoothness_norm,
    maximal_function,
)
from .space import (
    RegularityReport,
    SphereConditionReport,
    _clip_grid,
    check_sphere_condition,
    estimate_strong_upper_ahlfors,
    estimate_upper_ahlfors,
)

__all__ = [
    "HypothesisError",
    "CaseProfile",
    "case_select",
    "distance_power_function",
    "TestFunctionFamily",
    "default_test_family",
    "subtracted_potential",
    "OperatorNormBound",
    "operator_norm_lower_bound",
    "SufficiencyReport",
    "sufficiency_experiment",
    "NecessityReport",
    "necessity_experiment",
    "DecompositionReport",
    "decomposition_residual",
    "DEFAULT_SAFETY_FACTOR",
    "DIVERGENCE_TREND_TOL",
]

# A regularity constant whose log-log trend against r falls below this
# slope is treated as diverging under refinement.
DIVERGENCE_TREND_TOL = -0.1

# Necessity flags a violation candidate only when the scaled tails exceed
# this multiple of the sampled operator norm, leaving room for the
# unknown constant in the comparison.
DEFAULT_SAFETY_FACTOR = 10.0


class HypothesisError(RuntimeError):
    """A structural hypothesis of an experiment fails on the given data."""


@dataclass(frozen=True)
class CaseProfile:
    """Smoothing regime determined by the exponents (beta, upsilon, s2, s3).

    The comparison of s2 - beta with upsilon picks the regime, the regime
    fixes the target modulus for Q g, and no_decrease records whether that
    target is at least as strong as the input beta modulus near zero.
    Critical-regime conclusions additionally need the strong form of
    measure regularity. r_window bounds the radii where the necessity
    comparison is quantitative; beyond it the log-power moduli plateau.
    """

    tag: str
    beta: float
    upsilon: float
    s2: float
    s3: float
    target: Modulus
    no_decrease: bool
    needs_strong_regularity: bool
    r_window: float

    def to_dict(self):
        return {
            "tag": self.tag,
            "beta": self.beta,
            "upsilon": self.upsilon,
            "s2": self.s2,
            "s3": self.s3,
            "target": repr(self.target),
            "no_decrease": self.no_decrease,
            "needs_strong_regularity": self.needs_strong_regularity,
            "r_window": self.r_window,
        }


def case_select(beta, upsilon, s2, s3):
    """Classify the exponents and assemble the case profile."""
    tag = classify_smoothing_case(beta, upsilon, s2, s3)
    target = target_modulus_for_case(beta, upsilon, s2, s3)
    if tag == "supercritical":
        no_decrease = s2 <= upsilon + s3
    elif tag == "critical":
        no_decrease = s3 > beta
    else:
        no_decrease = s3 >= beta
    return CaseProfile(
        tag=tag,
        beta=float(beta),
        upsilon=float(upsilon),
        s2=float(s2),
        s3=float(s3),
        target=target,
        no_decrease=bool(no_decrease),
        needs_strong_regularity=tag == "critical",
        r_window=float(np.exp(-1.0 / s3)),
    )


# ---- test functions ----------------------------------------------------


def distance_power_function(space, x, beta):
    """The witness g(u) = d(x, u)^beta, sampled on X union Y.

    Its beta-seminorm is at most 1 by the reverse triangle inequality,
    and the pair (x, nearest neighbor of x) attains 1 exactly.
    """
    domain = np.union1d(space.x_indices, space.y_indices)
    values = space.dist[int(x), domain] ** beta
    return SampledFunction(indices=domain, values=values)


def _mcshane_field(space, domain, anchors, anchor_values, beta):
    # smallest beta-Hoelder extension construction: the pointwise min of
    # cones v_a + d(u, a)^beta has seminorm at most 1
    cones = anchor_values[None, :] + space.dist[np.ix_(domain, anchors)] ** beta
    return SampledFunction(indices=domain, values=cones.min(axis=1))


@dataclass
class TestFunctionFamily:
    """Witness functions with certified upper bounds on their seminorms.

    Each member is sampled on the same domain (X union Y). certified[k]
    bounds the beta-seminorm of members[k] analytically, so dividing an
    observed output seminorm by it understates, never overstates, the
    operator norm.
    """

    members: list
    certified: np.ndarray
    beta: float
    description: str

    def __len__(self):
        return len(self.members)


def default_test_family(space, beta, n_random=32, n_anchors=8, seed=0):
    """Distance-power witnesses at every X point plus random cone fields.

    The random members are pointwise minima of cones v_a + d(u, a)^beta
    over a few anchor points with values drawn in [-1, 1]; the min of
    1-seminorm cones again has seminorm at most 1.
    """
    domain = np.union1d(space.x_indices, space.y_indices)
    members = [distance_power_function(space, x, beta) for x in space.x_indices]
    rng = np.random.default_rng(seed)
    k = min(n_anchors, domain.size)
    for _ in range(n_random):
        anchors = rng.choice(domain, size=k, replace=False)
        values = rng.uniform(-1.0, 1.0, size=k)
        members.append(_mcshane_field(space, domain, anchors, values, beta))
    return TestFunctionFamily(
        members=members,
        certified=np.ones(len(members)),
        beta=float(beta),
        description=f"{space.x_indices.size} distance powers + {n_random} cone fields",
    )


# ---- applying the operator ---------------------------------------------


def subtracted_potential(space, kernel, g, kmat=None):
    """Apply Q to a sampled function; returns values along X.

    g must carry values on every Y point and every X point. The diagonal
    never contributes: coincident pairs have zero kernel weight and a
    vanishing subtracted factor.
    """
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    g.validate_for(space)
    g_y = g.values_at(space.y_indices)
    g_x = g.values_at(space.x_indices)
    weighted = kmat * space.w_y[None, :]
    return g_x * weighted.sum(axis=1) - weighted @ g_y


def _family_matrix(space, family):
    domain = family.members[0].indices
    stacked = np.empty(
        (len(family.members), domain.size),
        dtype=np.complex128 if any(np.iscomplexobj(m.values) for m in family.members) else np.float64,
    )
    for k, member in enumerate(family.members):
        if member.indices.shape != domain.shape or not np.array_equal(member.indices, domain):
            return None, None
        stacked[k] = member.values
    return domain, stacked


def _apply_family(space, kmat, family):
    """Q applied to every family member, one row per member."""
    domain, stacked = _family_matrix(space, family)
    if domain is None:
        rows = [
            subtracted_potential(space, None, member, kmat=kmat)
            for member in family.members
        ]
        return np.asarray(rows)
    pos_x = np.searchsorted(domain, space.x_indices)
    pos_y = np.searchsorted(domain, space.y_indices)
    if not (
        np.array_equal(domain[pos_x], space.x_indices)
        and np.array_equal(domain[pos_y], space.y_indices)
    ):
        raise ValueError("family members must cover X and Y")
    g_x = stacked[:, pos_x]
    g_y = stacked[:, pos_y]
    weighted = kmat * space.w_y[None, :]
    return g_x * weighted.sum(axis=1)[None, :] - g_y @ weighted.T


@dataclass
class OperatorNormBound:
    """Certified lower bound on the seminorm-to-seminorm operator norm.

    value is the best ratio (target-seminorm of Q g) / (certified input
    seminorm) over the family; the true norm of the sampled operator can
    only be larger. per_member keeps the individual ratios.
    """

    value: float
    best_member: int
    per_member: np.ndarray
    output_sup: np.ndarray
    modulus: Modulus
    family_description: str

    def to_dict(self):
        return {
            "value": self.value,
            "best_member": self.best_member,
            "per_member": self.per_member.tolist(),
            "modulus": repr(self.modulus),
            "family": self.family_description,
        }


def operator_norm_lower_bound(space, kernel, modulus, family=None, kmat=None, seed=0):
    """Lower-bound the operator norm of Q into the given target modulus.

    Every family member g comes with a certified bound on its input
    seminorm; the reported value is the largest observed quotient
    seminorm(Q g; modulus) / certified(g), a genuine lower bound for the
    sampled operator.
    """
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    if family is None:
        beta = getattr(modulus, "alpha", None)
        if beta is None:
            raise ValueError(
                "cannot infer an input exponent from the target modulus; "
                "pass a family built with default_test_family(space, beta)"
            )
        family = default_test_family(space, beta, seed=seed)
    q_all = _apply_family(space, kmat, family)
    inv_omega = _inverse_omega(modulus, space.dist_xx)
    seminorms = _accel.pair_ratio_max_many(q_all, inv_omega)
    ratios = seminorms / family.certified
    best = int(np.argmax(ratios))
    return OperatorNormBound(
        value=float(ratios[best]),
        best_member=best,
        per_member=ratios,
        output_sup=np.abs(q_all).max(axis=1),
        modulus=modulus,
        family_description=family.description,
    )


# ---- sufficiency -------------------------------------------------------


@dataclass
class SufficiencyReport:
    """Hypothesis checks plus the sampled smoothing bound for one case."""

    case: CaseProfile
    checks: list
    verdict: str
    size_norm: float
    smoothness_norm: float
    tail_profile: MaximalFunctionProfile
    augmented_norm: float
    regularity: RegularityReport
    strong_regularity: RegularityReport | None
    operator_bound: OperatorNormBound
    bound_ratio: float

    def to_dict(self):
        return {
            "case": self.case.to_dict(),
            "checks": self.checks,
            "verdict": self.verdict,
            "size_norm": self.size_norm,
            "smoothness_norm": self.smoothness_norm,
            "tail": self.tail_profile.to_dict(),
            "augmented_norm": self.augmented_norm,
            "regularity": self.regularity.to_dict(),
            "strong_regularity": (
                None if self.strong_regularity is None else self.strong_regularity.to_dict()
            ),
            "operator_bound": self.operator_bound.to_dict(),
            "bound_ratio": self.bound_ratio,
        }


def sufficiency_experiment(
    space, kernel, case, r_grid=None, family=None, seed=0
):
    """Check the smoothing hypotheses and measure the resulting bound.

    The checks record whether the sampled data is consistent with the
    assumptions behind the case's target modulus: finite kernel class
    norms, bounded truncated tails, and measure regularity whose constant
    does not blow up as the radius shrinks (in the strong annulus form
    too when the critical case requires it). The bound_ratio divides the
    observed operator norm by the augmented kernel norm; under the
    smoothing theory it should stay of order one under refinement.
    """
    from .space import default_r_grid

    if r_grid is None:
        r_grid = default_r_grid(space)
    kmat = kernel_matrix(space, kernel)
    size = kernel_size_norm(space, kernel, kmat)
    smooth = kernel_smoothness_norm(space, kernel, kmat)
    tails = maximal_function(space, kernel, r_grid, kmat=kmat)
    augmented = size + smooth + tails.sup
    # the boundedness hypothesis is about r -> 0, so judge the growth fit
    # on small radii only; every tail decays near the diameter regardless
    small = tails.r_values <= space.diameter / 4.0
    small_fit = (
        fit_growth_laws(tails.r_values[small], tails.sup_per_r[small])
        if int(small.sum()) >= 3
        else tails.fit
    )
    tails_bounded = small_fit.bounded if small_fit is not None else True
    regularity = estimate_upper_ahlfors(space, case.upsilon, r_grid=r_grid)
    strong = (
        estimate_strong_upper_ahlfors(space, case.upsilon)
        if case.needs_strong_regularity
        else None
    )
    if family is None:
        family = default_test_family(space, case.beta, seed=seed)
    bound = operator_norm_lower_bound(
        space, kernel, case.target, family=family, kmat=kmat
    )
    checks = [
        {
            "name": "kernel_norms_finite",
            "passed": bool(np.isfinite(size) and np.isfinite(smooth)),
            "detail": f"size {size:.6g}, smoothness {smooth:.6g}",
        },
        {
            "name": "tails_bounded",
            "passed": bool(tails_bounded),
            "detail": (
                "no growth fit" if small_fit is None else
                f"fitted power exponent {small_fit.power_exponent:.3g} "
                "on radii below diameter / 4"
            ),
        },
        {
            "name": "regularity_stable",
            "passed": bool(regularity.trend_exponent > DIVERGENCE_TREND_TOL),
            "detail": f"constant trend exponent {regularity.trend_exponent:.3g}",
        },
    ]
    if strong is not None:
        checks.append(
            {
                "name": "strong_regularity_stable",
                "passed": bool(strong.trend_exponent > DIVERGENCE_TREND_TOL),
                "detail": f"annulus constant trend exponent {strong.trend_exponent:.3g}",
            }
        )
    verdict = "consistent" if all(c["passed"] for c in checks) else "hypotheses not met"
    return SufficiencyReport(
        case=case,
        checks=checks,
        verdict=verdict,
        size_norm=size,
        smoothness_norm=smooth,
        tail_profile=tails,
        augmented_norm=augmented,
        regularity=regularity,
        strong_regularity=strong,
        operator_bound=bound,
        bound_ratio=float(bound.value / augmented) if augmented > 0.0 else 0.0,
    )


# ---- necessity ---------------------------------------------------------


@dataclass
class NecessityReport:
    """Scaled truncated tails against the operator norm they must respect.

    lhs[j] = sup_x |tail(x, r_j)| * r_j^beta / target(r_j) over the radii
    inside the quantitative window; threshold is the safety factor times
    the operator norm lower bound. plateau_r and plateau_lhs keep the
    same quantity beyond the window for context without entering the
    verdict.
    """

    case: CaseProfile
    r_values: np.ndarray
    tail_sup: np.ndarray
    lhs: np.ndarray
    plateau_r: np.ndarray
    plateau_lhs: np.ndarray
    sup_lhs: float
    operator_bound: OperatorNormBound
    safety_factor: float
    threshold: float
    verdict: str
    fit: GrowthFit | None
    sphere: SphereConditionReport | None

    def to_dict(self):
        return {
            "case": self.case.to_dict(),
            "r_values": self.r_values.tolist(),
            "tail_sup": self.tail_sup.tolist(),
            "lhs": self.lhs.tolist(),
            "plateau_r": self.plateau_r.tolist(),
            "plateau_lhs": self.plateau_lhs.tolist(),
            "sup_lhs": self.sup_lhs,
            "operator_bound": self.operator_bound.to_dict(),
            "safety_factor": self.safety_factor,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "sphere": None if self.sphere is None else self.sphere.to_dict(),
        }


def necessity_r_grid(space, case, n=12):
    """Geometric radii spanning the quantitative necessity window."""
    lo = 1.5 * space.h_min
    hi = case.r_window
    if lo >= hi:
        raise HypothesisError(
            f"necessity window (0, {hi:.4g}) has no room above the mesh "
            f"floor {space.h_min:.4g}; refine the space"
        )
    return np.geomspace(lo, hi, n)


def necessity_experiment(
    space,
    kernel,
    case,
    r_grid=None,
    family=None,
    safety_factor=DEFAULT_SAFETY_FACTOR,
    sphere_tolerance=None,
    check_spheres=True,
    seed=0,
):
    """Test the tail bound that boundedness of Q forces.

    If Q maps beta-seminorm boundedly into the target modulus, the
    truncated tails obey sup_x |tail(x, r)| <= C target(r) / r^beta for
    small r, with C controlled by the operator norm. The experiment
    samples the left side scaled by r^beta / target(r) and compares its
    sup against safety_factor times the certified operator norm lower
    bound. The comparison needs enough partners at every scale, so the
    sphere condition is checked at rho = r / 2 first and a failure raises
    HypothesisError rather than reporting a misleading verdict.
    """
    if r_grid is None:
        r_grid = necessity_r_grid(space, case)
    r_all, _ = _clip_grid(space, r_grid)
    in_window = r_all <= case.r_window
    r_win = r_all[in_window]
    r_plateau = r_all[~in_window]
    if r_win.size == 0:
        raise HypothesisError(
            f"no grid radii inside the necessity window (0, {case.r_window:.4g}]"
        )
    sphere = None
    if check_spheres:
        sphere = check_sphere_condition(
            space, r_win / 2.0, tolerance=sphere_tolerance
        )
        if not sphere.passed:
            bad = sphere.rho_values[~sphere.rho_pass]
            raise HypothesisError(
                "sphere condition fails at rho = "
                + ", ".join(f"{v:.4g}" for v in bad[:5])
                + (" ..." if bad.size > 5 else "")
                + f" (tolerance {sphere.tolerance:.4g})"
            )
    kmat = kernel_matrix(space, kernel)
    profile = maximal_function(space, kernel, r_all, kmat=kmat)
    scale = r_all**case.beta / modulus_eval(case.target, r_all)
    scaled = profile.sup_per_r * scale
    lhs = scaled[in_window]
    if family is None:
        family = default_test_family(space, case.beta, seed=seed)
    bound = operator_norm_lower_bound(
        space, kernel, case.target, family=family, kmat=kmat
    )
    threshold = safety_factor * bound.value
    sup_lhs = float(lhs.max())
    verdict = "satisfied" if sup_lhs <= threshold else "violation candidate"
    return NecessityReport(
        case=case,
        r_values=r_win,
        tail_sup=profile.sup_per_r[in_window],
        lhs=lhs,
        plateau_r=r_plateau,
        plateau_lhs=scaled[~in_window],
        sup_lhs=sup_lhs,
        operator_bound=bound,
        safety_factor=float(safety_factor),
        threshold=float(threshold),
        verdict=verdict,
        fit=fit_growth_laws(r_win, lhs),
        sphere=sphere,
    )


# ---- difference decomposition ------------------------------------------


@dataclass
class DecompositionReport:
    """Exact four-part split of (Q g)(x1) - (Q g)(x2).

    near_x1 and near_x2 integrate over the ball of radius 2 d(x1, x2)
    around x1; far_step and far_kernel_diff integrate over its
    complement, the first moving the base point of g and the second
    moving the base point of the kernel. The four parts recombine to the
    difference exactly; residual records the float discrepancy.
    """

    x1: int
    x2: int
    separation: float
    near_x1: complex
    near_x2: complex
    far_step: complex
    far_kernel_diff: complex
    difference: complex
    recombined: complex
    residual: float
    relative_residual: float

    def parts(self):
        return (self.near_x1, self.near_x2, self.far_step, self.far_kernel_diff)

    def to_dict(self):
        def plain(z):
            return {"re": z.real, "im": z.imag} if isinstance(z, complex) else z

        return {
            "x1": self.x1,
            "x2": self.x2,
            "separation": self.separation,
            "near_x1": plain(self.near_x1),
            "near_x2": plain(self.near_x2),
            "far_step": plain(self.far_step),
            "far_kernel_diff": plain(self.far_kernel_diff),
            "difference": plain(self.difference),
            "recombined": plain(self.recombined),
            "residual": self.residual,
            "relative_residual": self.relative_residual,
        }


def decomposition_residual(space, kernel, g, x1, x2, kmat=None):
    """Split (Q g)(x1) - (Q g)(x2) into its four standard parts.

    Splitting Y at the ball of radius 2 d(x1, x2) around x1 gives

        near_x1        = sum over the ball of K(x1, y) (g(x1) - g(y)),
        near_x2        = -sum over the ball of K(x2, y) (g(x2) - g(y)),
        far_step       = sum outside of K(x1, y) (g(x1) - g(x2)),
        far_kernel_diff= sum outside of (K(x1, y) - K(x2, y)) (g(x2) - g(y)),

    all weighted by w(y). This is the algebraic identity behind the
    smoothness estimates: each part is controlled by one hypothesis. The
    report checks the recombination numerically.
    """
    x1 = int(x1)
    x2 = int(x2)
    if x1 == x2:
        raise ValueError("x1 and x2 must be distinct X points")
    d12 = float(space.dist[x1, x2])
    if d12 == 0.0:
        raise ValueError("x1 and x2 must be separated")
    if kmat is None:
        kmat = kernel_matrix(space, kernel)
    i1 = space.x_position(x1)
    i2 = space.x_position(x2)
    g.validate_for(space)
    g_y = g.values_at(space.y_indices)
    g1 = g.values_at(np.array([x1]))[0]
    g2 = g.values_at(np.array([x2]))[0]
    row1 = kmat[i1] * space.w_y
    row2 = kmat[i2] * space.w_y
    near = space.dist_xy[i1] < 2.0 * d12
    far = ~near
    near_x1 = (row1[near] * (g1 - g_y[near])).sum()
    near_x2 = -(row2[near] * (g2 - g_y[near])).sum()
    far_step = row1[far].sum() * (g1 - g2)
    far_kernel_diff = ((row1[far] - row2[far]) * (g2 - g_y[far])).sum()
    q1 = (row1 * (g1 - g_y)).sum()
    q2 = (row2 * (g2 - g_y)).sum()
    difference = q1 - q2
    recombined = near_x1 + near_x2 + far_step + far_kernel_diff
    residual = abs(difference - recombined)
    scale = max(
        abs(difference),
        abs(near_x1) + abs(near_x2) + abs(far_step) + abs(far_kernel_diff),
    )
    return DecompositionReport(
        x1=x1,
        x2=x2,
        separation=d12,
        near_x1=complex(near_x1),
        near_x2=complex(near_x2),
        far_step=complex(far_step),
        far_kernel_diff=complex(far_kernel_diff),
        difference=complex(difference),
        recombined=complex(recombined),
        residual=float(residual),
        relative_residual=float(residual / scale) if scale > 0.0 else 0.0,
    )
