"""Numerical toolkit for singular-integral smoothing on sampled spaces.

The package discretizes the interplay between kernel classes, measure
regularity, and Hoelder-type smoothing of subtracted singular integrals:

* spaces: finite weighted metric spaces, ball measures, regularity
  estimates, the sphere condition (`space`);
* smoothness: moduli of continuity, sampled Hoelder seminorms, the
  exponent trichotomy picking the smoothing target (`holder`);
* kernels: a gallery, class norms, truncated maximal functions, growth
  fits (`kernels`);
* the operator: subtracted potentials, operator-norm lower bounds,
  sufficiency and necessity experiments, the four-part difference
  decomposition (`operator`);
* bounds: truncated Riesz-sum laws with exact layer-cake constants
  (`bounds`);
* manifolds: sampled curves and surfaces, tangential gradients of
  singular potentials, the surface necessity experiment (`manifold`).

Attributes load lazily so importing the package stays cheap and thread
environment variables set by the command line take effect before any
numeric library loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "space": [
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
    ],
    "holder": [
        "Modulus",
        "Power",
        "LogPower",
        "MaxOf",
        "MinExp",
        "modulus_eval",
        "SampledFunction",
        "holder_seminorm",
        "holder_norm_b",
        "classify_smoothing_case",
        "target_modulus_for_case",
        "embedding_constant",
    ],
    "kernels": [
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
    ],
    "operator": [
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
        "necessity_r_grid",
        "DecompositionReport",
        "decomposition_residual",
    ],
    "bounds": [
        "RieszBoundReport",
        "riesz_ball_sums",
        "riesz_tail_sums",
        "sup_riesz_potential",
        "truncated_riesz_bound",
        "truncated_sup_report",
        "ball_growth_report",
        "tail_decay_report",
        "log_tail_report",
        "verify_bounds",
    ],
    "manifold": [
        "ParametrizedManifold",
        "build_circle",
        "build_sphere",
        "to_space",
        "AmbientFunction",
        "tangential_gradient",
        "GradKernelSpec",
        "single_layer_log",
        "grad_riesz",
        "verify_gradient_formula",
        "manifold_necessity",
    ],
    "_accel": [
        "backend_name",
    ],
}

_ATTR_TO_MODULE = {
    name: module for module, names in _EXPORTS.items() for name in names
}

__all__ = sorted(_ATTR_TO_MODULE) + ["__version__"]


def __getattr__(name):
    module = _ATTR_TO_MODULE.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    from importlib import import_module

    value = getattr(import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
