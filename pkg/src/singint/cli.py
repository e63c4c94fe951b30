"""Command-line interface.

Subcommands map one to one onto the library's experiments:

  regularity          upper-regularity constants of a sampled measure
  sphere-condition    partner-distance check behind the necessity theory
  kernel-norms        size, smoothness, and tail-augmented kernel norms
  maximal-function    truncated tail integrals over a radius grid
  apply-q             apply the subtracted potential to a function
  sufficiency         smoothing hypotheses plus the sampled bound
  necessity           scaled tails against the operator norm
  verify-lemmas       truncated Riesz-sum laws with exact constants
  manifold-gradient   surface-gradient identity residuals
  manifold-necessity  necessity for tangential gradient kernels
  refine              rerun a subcommand across resolutions

Reports are JSON (sorted keys, one timestamp field); --csv extracts the
main profile as rows. Exit code 0 means the experiment ran, 2 means a
structural hypothesis failed or a verification came back negative, 1 is
an operational error. Config files supply the same settings as flags,
flags win. AK_THREADS caps the numeric thread pools when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

_CONFIG_SECTIONS = {
    "space",
    "kernel",
    "case",
    "grids",
    "family",
    "seed",
    "safety_factor",
    "sphere_tolerance",
    "s",
    "upsilon",
    "beta",
    "output",
    "manifold",
    "function",
    "mu",
}

_SECTION_KEYS = {
    "space": {"file", "preset", "n", "radius", "level", "separation", "dim", "seed"},
    "kernel": {"name", "params"},
    "case": {"beta", "upsilon", "s2", "s3"},
    "grids": {"r", "a", "t", "rho"},
    "family": {"n_random", "n_anchors"},
    "manifold": {"preset", "n", "radius"},
    "function": {"type", "x", "beta", "file"},
}


def _configure_threads():
    cap = os.environ.get("AK_THREADS")
    if cap:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)


def _load_config(path):
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(cfg) - _CONFIG_SECTIONS
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    for section, allowed in _SECTION_KEYS.items():
        if section in cfg:
            if not isinstance(cfg[section], dict):
                raise ValueError(f"config section {section!r} must be an object")
            bad = set(cfg[section]) - allowed
            if bad:
                raise ValueError(
                    f"unknown keys {sorted(bad)} in config section {section!r}"
                )
    return cfg


def _parse_grid(spec, space=None):
    """Grid specs: dyadic:min:max, geometric:min:max:n, linear:min:max:n,
    explicit:v1,v2,..."""
    import numpy as np

    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "dyadic" and len(parts) == 3:
            lo, hi = float(parts[1]), float(parts[2])
            if lo <= 0 or hi < lo:
                raise ValueError
            k = int(np.floor(np.log2(hi / lo) * (1 + 1e-12))) + 1
            return lo * 2.0 ** np.arange(k)
        if kind == "geometric" and len(parts) == 4:
            return np.geomspace(float(parts[1]), float(parts[2]), int(parts[3]))
        if kind == "linear" and len(parts) == 4:
            return np.linspace(float(parts[1]), float(parts[2]), int(parts[3]))
        if kind == "explicit" and len(parts) == 2:
            return np.array([float(v) for v in parts[1].split(",")])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"bad grid spec {spec!r}") from exc
    raise ValueError(
        f"bad grid spec {spec!r}; use dyadic:min:max, geometric:min:max:n, "
        "linear:min:max:n, or explicit:v1,v2,..."
    )


def _space_from_settings(settings):
    from . import space as spc

    if "file" in settings and settings["file"]:
        return spc.load_space(settings["file"])
    preset = settings.get("preset")
    n = int(settings.get("n", 256))
    radius = float(settings.get("radius", 1.0))
    if preset == "circle":
        from .manifold import build_circle, to_space

        return to_space(build_circle(n, radius))
    if preset == "sphere":
        from .manifold import build_sphere, to_space

        return to_space(build_sphere(n, radius))
    if preset == "cantor":
        return spc.cantor_space(int(settings.get("level", 5)))
    if preset == "two_point":
        return spc.two_point_space(float(settings.get("separation", 1.0)))
    if preset == "random":
        return spc.random_cloud(
            n, int(settings.get("dim", 2)), int(settings.get("seed", 0))
        )
    raise ValueError(
        "no space given; use --space FILE or a preset "
        "(--circle N, --sphere N, --cantor LEVEL, --two-point)"
    )


def _resolve_space(args, cfg):
    settings = dict(cfg.get("space", {}))
    if getattr(args, "space", None):
        settings = {"file": args.space}
    if getattr(args, "circle", None):
        settings = {"preset": "circle", "n": args.circle}
    if getattr(args, "sphere", None):
        settings = {"preset": "sphere", "n": args.sphere}
    if getattr(args, "cantor", None):
        settings = {"preset": "cantor", "level": args.cantor}
    if getattr(args, "two_point", False):
        settings = {"preset": "two_point"}
    if getattr(args, "radius", None) is not None:
        settings["radius"] = args.radius
    return _space_from_settings(settings)


def _resolve_manifold(args, cfg):
    settings = dict(cfg.get("manifold", {}))
    if getattr(args, "circle", None):
        settings = {"preset": "circle", "n": args.circle}
    if getattr(args, "sphere", None):
        settings = {"preset": "sphere", "n": args.sphere}
    if getattr(args, "radius", None) is not None:
        settings["radius"] = args.radius
    preset = settings.get("preset")
    n = int(settings.get("n", 256))
    radius = float(settings.get("radius", 1.0))
    from .manifold import build_circle, build_sphere

    if preset == "circle":
        return build_circle(n, radius)
    if preset == "sphere":
        return build_sphere(n, radius)
    raise ValueError("manifold commands need --circle N or --sphere N")


def _kernel_params(args, cfg):
    params = dict(cfg.get("kernel", {}).get("params", {}))
    for item in getattr(args, "kernel_param", None) or []:
        if "=" not in item:
            raise ValueError(f"bad --kernel-param {item!r}; use key=value")
        key, _, value = item.partition("=")
        params[key] = float(value)
    return params


def _resolve_kernel(args, cfg):
    from .kernels import kernel_by_name

    name = getattr(args, "kernel", None) or cfg.get("kernel", {}).get("name")
    if not name:
        raise ValueError("no kernel given; use --kernel NAME")
    return kernel_by_name(name, **_kernel_params(args, cfg))


def _resolve_case(args, cfg):
    from .operator import case_select

    settings = dict(cfg.get("case", {}))
    for key in ("beta", "upsilon", "s2", "s3"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    missing = [k for k in ("beta", "upsilon", "s2", "s3") if k not in settings]
    if missing:
        raise ValueError(f"case needs {missing}; use --beta/--upsilon/--s2/--s3")
    return case_select(
        settings["beta"], settings["upsilon"], settings["s2"], settings["s3"]
    )


def _resolve_grid(args, cfg, flag, space=None):
    spec = getattr(args, flag + "_grid", None) or cfg.get("grids", {}).get(flag)
    return None if spec is None else _parse_grid(spec, space)


def _scalar(args, cfg, name, default=None):
    value = getattr(args, name, None)
    if value is None:
        value = cfg.get(name, default)
    return value


def _family(args, cfg, space, beta):
    from .operator import default_test_family

    fam = cfg.get("family", {})
    return default_test_family(
        space,
        beta,
        n_random=int(_scalar(args, cfg, "n_random", fam.get("n_random", 32)) or 32),
        n_anchors=int(_scalar(args, cfg, "n_anchors", fam.get("n_anchors", 8)) or 8),
        seed=int(_scalar(args, cfg, "seed", 0) or 0),
    )


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(args, command, body, csv_rows=None):
    from . import _accel

    report = dict(body)
    report["command"] = command
    report["backend"] = _accel.backend_name()
    report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default)
    output = getattr(args, "output", None)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {output}")
    else:
        print(text)
    csv_path = getattr(args, "csv", None)
    if csv_path:
        if not csv_rows:
            print(f"{command} produced no CSV profile", file=sys.stderr)
            return
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerows(csv_rows)
        print(f"wrote {csv_path}", file=sys.stderr)


# ---- subcommand handlers -----------------------------------------------


def _cmd_regularity(args, cfg):
    from .space import estimate_strong_upper_ahlfors, estimate_upper_ahlfors

    space = _resolve_space(args, cfg)
    upsilon = _scalar(args, cfg, "upsilon")
    if upsilon is None:
        raise ValueError("regularity needs --upsilon")
    grid = _resolve_grid(args, cfg, "r", space)
    upper = estimate_upper_ahlfors(space, upsilon, r_grid=grid)
    strong = estimate_strong_upper_ahlfors(space, upsilon)
    body = {"upper": upper.to_dict(), "strong": strong.to_dict()}
    rows = [("r", "max_ratio")] + list(
        zip(upper.r_values.tolist(), upper.per_r_max.tolist())
    )
    return body, rows, 0


def _cmd_sphere_condition(args, cfg):
    import numpy as np

    from .space import check_sphere_condition

    space = _resolve_space(args, cfg)
    grid = _resolve_grid(args, cfg, "rho", space)
    if grid is None:
        grid = np.geomspace(2.0 * space.h_min, space.diameter / 2.0, 16)
    tol = _scalar(args, cfg, "sphere_tolerance")
    report = check_sphere_condition(space, grid, tolerance=tol)
    rows = [("rho", "passes")] + list(
        zip(report.rho_values.tolist(), [int(v) for v in report.rho_pass])
    )
    return report.to_dict(), rows, 0 if report.passed else 2


def _cmd_kernel_norms(args, cfg):
    from .kernels import (
        kernel_matrix,
        kernel_norm_with_tail,
        kernel_size_norm,
        kernel_smoothness_norm,
        maximal_function,
    )
    from .space import default_r_grid

    space = _resolve_space(args, cfg)
    kernel = _resolve_kernel(args, cfg)
    grid = _resolve_grid(args, cfg, "r", space)
    if grid is None:
        grid = default_r_grid(space)
    kmat = kernel_matrix(space, kernel)
    size = kernel_size_norm(space, kernel, kmat)
    smooth = kernel_smoothness_norm(space, kernel, kmat)
    profile = maximal_function(space, kernel, grid, kmat=kmat)
    body = {
        "kernel": kernel.name,
        "exponents": {"s1": kernel.s1, "s2": kernel.s2, "s3": kernel.s3},
        "size_norm": size,
        "smoothness_norm": smooth,
        "norm": size + smooth,
        "tail_sup": profile.sup,
        "augmented_norm": kernel_norm_with_tail(space, kernel, grid, kmat=kmat),
        "tail_fit": None if profile.fit is None else profile.fit.to_dict(),
    }
    rows = [("key", "value")] + [
        (k, v) for k, v in body.items() if isinstance(v, (int, float))
    ]
    return body, rows, 0


def _cmd_maximal_function(args, cfg):
    from .kernels import maximal_function
    from .space import default_r_grid

    space = _resolve_space(args, cfg)
    kernel = _resolve_kernel(args, cfg)
    grid = _resolve_grid(args, cfg, "r", space)
    if grid is None:
        grid = default_r_grid(space)
    profile = maximal_function(space, kernel, grid)
    body = {"kernel": kernel.name, **profile.to_dict()}
    rows = [("r", "sup_tail")] + list(
        zip(profile.r_values.tolist(), profile.sup_per_r.tolist())
    )
    return body, rows, 0


def _resolve_function(args, cfg, space):
    import numpy as np

    from .holder import SampledFunction
    from .operator import distance_power_function

    spec = getattr(args, "witness", None)
    settings = cfg.get("function", {})
    values_file = getattr(args, "values", None) or settings.get("file")
    if values_file:
        with open(values_file) as fh:
            data = json.load(fh)
        unknown = set(data) - {"indices", "values"}
        if unknown:
            raise ValueError(f"unknown keys in function file: {sorted(unknown)}")
        return SampledFunction(
            indices=np.asarray(data["indices"], dtype=np.int64),
            values=np.asarray(data["values"], dtype=np.float64),
        )
    if spec is None and settings.get("type") == "distance_power":
        spec = f"distance:{settings.get('x', 0)}:{settings.get('beta', 0.5)}"
    if spec is None:
        spec = "distance:0:0.5"
    parts = spec.split(":")
    if parts[0] != "distance" or len(parts) != 3:
        raise ValueError(
            f"bad witness {spec!r}; use distance:POINT:BETA or --values FILE"
        )
    return distance_power_function(space, int(parts[1]), float(parts[2]))


def _cmd_apply_q(args, cfg):
    from .operator import subtracted_potential

    space = _resolve_space(args, cfg)
    kernel = _resolve_kernel(args, cfg)
    g = _resolve_function(args, cfg, space)
    q = subtracted_potential(space, kernel, g)
    body = {
        "kernel": kernel.name,
        "x_indices": space.x_indices.tolist(),
        "values": q.tolist(),
        "sup": float(abs(q).max()),
    }
    rows = [("x_index", "value")] + list(zip(space.x_indices.tolist(), q.tolist()))
    return body, rows, 0


def _cmd_sufficiency(args, cfg):
    from .operator import sufficiency_experiment

    space = _resolve_space(args, cfg)
    kernel = _resolve_kernel(args, cfg)
    case = _resolve_case(args, cfg)
    grid = _resolve_grid(args, cfg, "r", space)
    family = _family(args, cfg, space, case.beta)
    report = sufficiency_experiment(
        space, kernel, case, r_grid=grid, family=family
    )
    rows = [("check", "passed")] + [(c["name"], int(c["passed"])) for c in report.checks]
    return report.to_dict(), rows, 0 if report.verdict == "consistent" else 2


def _cmd_necessity(args, cfg):
    from .operator import necessity_experiment

    space = _resolve_space(args, cfg)
    kernel = _resolve_kernel(args, cfg)
    case = _resolve_case(args, cfg)
    grid = _resolve_grid(args, cfg, "r", space)
    family = _family(args, cfg, space, case.beta)
    report = necessity_experiment(
        space,
        kernel,
        case,
        r_grid=grid,
        family=family,
        safety_factor=float(_scalar(args, cfg, "safety_factor", 10.0)),
        sphere_tolerance=_scalar(args, cfg, "sphere_tolerance"),
    )
    rows = [("r", "scaled_tail")] + list(
        zip(report.r_values.tolist(), report.lhs.tolist())
    )
    return report.to_dict(), rows, 0


def _cmd_verify_lemmas(args, cfg):
    from .bounds import verify_bounds

    space = _resolve_space(args, cfg)
    upsilon = _scalar(args, cfg, "upsilon")
    if upsilon is None:
        raise ValueError("verify-lemmas needs --upsilon")
    s_below = _scalar(args, cfg, "s")
    reports = verify_bounds(space, upsilon, s_below=s_below)
    body = {name: rep.to_dict() for name, rep in reports.items()}
    all_passed = all(rep.passed for rep in reports.values())
    body["all_passed"] = all_passed
    rows = [("law", "measured", "predicted", "passed")] + [
        (name, rep.measured_constant, rep.predicted_constant, int(rep.passed))
        for name, rep in reports.items()
    ]
    for name, rep in reports.items():
        print(f"{name}: {'pass' if rep.passed else 'FAIL'} ({rep.detail})",
              file=sys.stderr)
    return body, rows, 0 if all_passed else 2


def _resolve_mu(args, cfg):
    import numpy as np

    from .manifold import AmbientFunction

    spec = getattr(args, "mu", None) or cfg.get("mu", {}).get("name") or "constant"
    if spec == "constant":
        return AmbientFunction(lambda p: np.ones(p.shape[:-1]), name="constant")
    if spec.startswith("coordinate:"):
        axis = int(spec.split(":")[1])
        return AmbientFunction(lambda p: p[..., axis], name=spec)
    raise ValueError(f"bad --mu {spec!r}; use constant or coordinate:AXIS")


def _resolve_grad_kernel(args, cfg):
    from .manifold import grad_kernel_by_name

    name = getattr(args, "grad_kernel", None) or cfg.get("kernel", {}).get("name")
    if not name:
        raise ValueError("no gradient kernel given; use --grad-kernel NAME")
    return grad_kernel_by_name(name, **_kernel_params(args, cfg))


def _cmd_manifold_gradient(args, cfg):
    from .manifold import verify_gradient_formula

    manifold = _resolve_manifold(args, cfg)
    kernel = _resolve_grad_kernel(args, cfg)
    mu = _resolve_mu(args, cfg)
    report = verify_gradient_formula(
        manifold, kernel, mu, step=getattr(args, "step", None)
    )
    body = {"manifold": manifold.name, "kernel": kernel.name, "mu": mu.name}
    body.update(report.to_dict())
    rows = [("node", "residual")] + list(enumerate(report.residuals.tolist()))
    return body, rows, 0


def _cmd_manifold_necessity(args, cfg):
    from .manifold import manifold_necessity

    manifold = _resolve_manifold(args, cfg)
    kernel = _resolve_grad_kernel(args, cfg)
    beta = _scalar(args, cfg, "beta")
    if beta is None:
        raise ValueError("manifold-necessity needs --beta")
    report = manifold_necessity(
        manifold,
        kernel,
        float(beta),
        safety_factor=float(_scalar(args, cfg, "safety_factor", 10.0)),
        sphere_tolerance=_scalar(args, cfg, "sphere_tolerance"),
        seed=int(_scalar(args, cfg, "seed", 0) or 0),
    )
    rows = [("r", "scaled_tail")] + list(
        zip(report.r_values.tolist(), report.lhs.tolist())
    )
    return report.to_dict(), rows, 0


_HEADLINES = {
    "regularity": ("upper", "c_upper"),
    "kernel-norms": ("augmented_norm",),
    "maximal-function": ("sup",),
    "apply-q": ("sup",),
    "sufficiency": ("bound_ratio",),
    "necessity": ("sup_lhs",),
    "manifold-gradient": ("max_residual",),
    "manifold-necessity": ("sup_lhs",),
}


def _cmd_refine(args, cfg, parser):
    import numpy as np

    resolutions = [int(v) for v in args.resolutions.split(",")]
    if len(resolutions) < 2:
        raise ValueError("refine needs at least two resolutions")
    if args.target == "refine":
        raise ValueError("refine cannot rerun itself")
    if args.target not in _HANDLERS:
        raise ValueError(f"unknown subcommand {args.target!r}")
    preset_flag = {"circle": "--circle", "sphere": "--sphere"}[args.preset]
    reports = []
    worst = 0
    for n in resolutions:
        sub_args = parser.parse_args([args.target, *args.rest, preset_flag, str(n)])
        body, _, code = _dispatch(sub_args, parser)
        worst = max(worst, code)
        reports.append(body)
    headline = _HEADLINES.get(args.target)
    values = None
    orders = None
    if headline is not None:
        values = []
        for body in reports:
            node = body
            for key in headline:
                node = node.get(key) if isinstance(node, dict) else None
            values.append(node)
        if all(isinstance(v, (int, float)) and v > 0 for v in values):
            orders = [
                float(
                    np.log(values[i] / values[i + 1])
                    / np.log(resolutions[i + 1] / resolutions[i])
                )
                for i in range(len(values) - 1)
            ]
    body = {
        "target": args.target,
        "resolutions": resolutions,
        "reports": reports,
        "headline": {
            "path": list(headline) if headline else None,
            "values": values,
            "observed_orders": orders,
        },
    }
    rows = None
    if values is not None:
        rows = [("resolution", "headline")] + list(zip(resolutions, values))
    return body, rows, worst


# ---- parser ------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="singint",
        description="Singular-integral smoothing experiments on sampled spaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--output", help="write the JSON report here")
    common.add_argument("--csv", help="write the profile rows here as CSV")
    common.add_argument("--space", help="space JSON file")
    common.add_argument("--circle", type=int, metavar="N", help="unit-circle preset")
    common.add_argument("--sphere", type=int, metavar="N", help="sphere preset")
    common.add_argument("--cantor", type=int, metavar="LEVEL", help="Cantor preset")
    common.add_argument("--two-point", action="store_true", help="two-point preset")
    common.add_argument("--radius", type=float, help="preset radius")
    common.add_argument("--seed", type=int, help="random seed for witness families")
    common.add_argument("--force-python", action="store_true",
                        help="use the pure-Python compute backend")

    kernelish = argparse.ArgumentParser(add_help=False)
    kernelish.add_argument("--kernel", help="gallery kernel name")
    kernelish.add_argument("--kernel-param", action="append", metavar="K=V",
                           help="kernel parameter, repeatable")

    caseish = argparse.ArgumentParser(add_help=False)
    for flag in ("beta", "upsilon", "s2", "s3"):
        caseish.add_argument(f"--{flag}", type=float)
    caseish.add_argument("--safety-factor", type=float, dest="safety_factor")
    caseish.add_argument("--sphere-tolerance", type=float, dest="sphere_tolerance")
    caseish.add_argument("--n-random", type=int, dest="n_random")
    caseish.add_argument("--n-anchors", type=int, dest="n_anchors")

    grids = argparse.ArgumentParser(add_help=False)
    for flag in ("r", "a", "t", "rho"):
        grids.add_argument(
            f"--{flag}-grid",
            dest=f"{flag}_grid",
            metavar="SPEC",
            help="dyadic:min:max | geometric:min:max:n | linear:min:max:n | explicit:v,..",
        )

    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("regularity", parents=[common, grids],
                   help="measure upper-regularity constants").add_argument(
        "--upsilon", type=float)
    sub.add_parser("sphere-condition", parents=[common, grids],
                   help="check partner distances").add_argument(
        "--sphere-tolerance", type=float, dest="sphere_tolerance")
    sub.add_parser("kernel-norms", parents=[common, kernelish, grids],
                   help="kernel class norms")
    sub.add_parser("maximal-function", parents=[common, kernelish, grids],
                   help="truncated tail integrals")
    apply_q = sub.add_parser("apply-q", parents=[common, kernelish],
                             help="apply the subtracted potential")
    apply_q.add_argument("--witness", metavar="distance:POINT:BETA")
    apply_q.add_argument("--values", metavar="FILE",
                         help="JSON file with indices and values")
    sub.add_parser("sufficiency", parents=[common, kernelish, caseish, grids],
                   help="smoothing hypotheses and sampled bound")
    sub.add_parser("necessity", parents=[common, kernelish, caseish, grids],
                   help="scaled tails against the operator norm")
    verify = sub.add_parser("verify-lemmas", parents=[common, grids],
                            help="truncated Riesz-sum laws")
    verify.add_argument("--upsilon", type=float)
    verify.add_argument("--s", type=float, help="exponent below upsilon")
    grad = sub.add_parser("manifold-gradient", parents=[common, kernelish],
                          help="surface-gradient identity residuals")
    grad.add_argument("--grad-kernel", dest="grad_kernel")
    grad.add_argument("--mu", help="constant or coordinate:AXIS")
    grad.add_argument("--step", type=float, help="finite-difference step")
    mnec = sub.add_parser("manifold-necessity", parents=[common, kernelish, caseish],
                          help="necessity for tangential gradient kernels")
    mnec.add_argument("--grad-kernel", dest="grad_kernel")
    refine = sub.add_parser("refine", parents=[common],
                            help="rerun a subcommand across resolutions")
    refine.add_argument("--resolutions", required=True, metavar="N1,N2,...")
    refine.add_argument("--preset", choices=["circle", "sphere"], default="circle")
    refine.add_argument("target", help="subcommand to rerun")
    refine.add_argument("rest", nargs=argparse.REMAINDER,
                        help="arguments for the target subcommand")
    return parser


_HANDLERS = {
    "regularity": _cmd_regularity,
    "sphere-condition": _cmd_sphere_condition,
    "kernel-norms": _cmd_kernel_norms,
    "maximal-function": _cmd_maximal_function,
    "apply-q": _cmd_apply_q,
    "sufficiency": _cmd_sufficiency,
    "necessity": _cmd_necessity,
    "verify-lemmas": _cmd_verify_lemmas,
    "manifold-gradient": _cmd_manifold_gradient,
    "manifold-necessity": _cmd_manifold_necessity,
}


def _dispatch(args, parser):
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    if args.subcommand == "refine":
        return _cmd_refine(args, cfg, parser)
    return _HANDLERS[args.subcommand](args, cfg)


def main(argv=None):
    _configure_threads()
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "force_python", False):
        os.environ["SINGINT_FORCE_PYTHON"] = "1"
    try:
        body, rows, code = _dispatch(args, parser)
    except FileNotFoundError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map hypothesis failures to exit 2
        from .operator import HypothesisError

        if isinstance(exc, HypothesisError):
            _emit(args, args.subcommand,
                  {"error": str(exc), "kind": "hypothesis_violation"})
            return 2
        raise
    _emit(args, args.subcommand, body, csv_rows=rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
