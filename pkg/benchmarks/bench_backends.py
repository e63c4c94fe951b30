"""Time the compiled inner loops against the numpy fallback.

Runs the two hot kernels, the admissible-triple smoothness scan and the
batched pair-ratio scan, on uniform circles of a few sizes, calling the
compiled extension and the pure-python module directly on identical
pre-marshalled inputs. Usage:

    python benchmarks/bench_backends.py [--sizes 128,256,512] [--repeats 5]
"""

import argparse
import time

import numpy as np

from singint import _core_py
from singint.kernels import kernel_matrix, riesz
from singint.manifold import build_circle, to_space

try:
    from singint import _core
except ImportError:
    _core = None


def marshalled_inputs(n, seed=0):
    """Build one circle's worth of arguments for both raw backends."""
    space = to_space(build_circle(n))
    kmat = np.ascontiguousarray(
        kernel_matrix(space, riesz(1.0)), dtype=np.complex128
    )
    dist_xy = space.dist_xy
    order = np.argsort(dist_xy, axis=1, kind="stable")
    dist_sorted = np.ascontiguousarray(np.take_along_axis(dist_xy, order, axis=1))
    with np.errstate(divide="ignore"):
        dist_pow = np.where(dist_xy > 0.0, dist_xy, 1.0) ** 2.0
    dist_pow[dist_xy == 0.0] = 0.0
    scan_args = (
        np.ascontiguousarray(space.dist_xx),
        dist_sorted,
        np.ascontiguousarray(order, dtype=np.int_),
        np.ascontiguousarray(dist_pow),
        kmat,
        1.0,
    )

    rng = np.random.default_rng(seed)
    values = np.ascontiguousarray(
        rng.normal(size=(8, n)) + 1j * rng.normal(size=(8, n)),
        dtype=np.complex128,
    )
    with np.errstate(divide="ignore"):
        inv_omega = np.where(space.dist > 0.0, 1.0 / np.sqrt(space.dist), 0.0)
    ratio_args = (values, np.ascontiguousarray(inv_omega))
    return scan_args, ratio_args


def best_time(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="128,256,512")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(v) for v in args.sizes.split(",")]

    if _core is None:
        print("compiled extension not importable; nothing to compare")
        print("(build it with: pip install -e . --no-build-isolation)")
        return

    header = f"{'kernel':<20}{'n':>6}{'compiled':>12}{'python':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        scan_args, ratio_args = marshalled_inputs(n)
        for name, fn_args in [
            ("smoothness_scan", scan_args),
            ("pair_ratio_max_many", ratio_args),
        ]:
            fast = best_time(getattr(_core, name), fn_args, args.repeats)
            slow = best_time(getattr(_core_py, name), fn_args, args.repeats)
            check_fast = np.asarray(getattr(_core, name)(*fn_args))
            check_slow = np.asarray(getattr(_core_py, name)(*fn_args))
            assert np.allclose(check_fast, check_slow, rtol=1e-12), name
            print(
                f"{name:<20}{n:>6}{fast:>11.4f}s{slow:>11.4f}s{slow / fast:>8.1f}x"
            )


if __name__ == "__main__":
    main()
