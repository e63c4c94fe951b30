"""Backend selection for the hot inner loops.

The compiled extension singint._core is preferred when it imports; the
numpy implementation in singint._core_py is the fallback. Setting the
environment variable SINGINT_FORCE_PYTHON to a nonempty value skips the
extension, which is how the benchmark and the backend tests compare the
two paths.
"""

import os

import numpy as np

if os.environ.get("SINGINT_FORCE_PYTHON"):
    from . import _core_py as _impl

    HAVE_COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import _core_py as _impl

        HAVE_COMPILED = False


def backend_name():
    return "compiled" if HAVE_COMPILED else "python"


def smoothness_scan(dist_xx, dist_xy, kmat, s2, s3):
    """Dispatch the admissible-triple scan; returns the scalar max."""
    dist_xx = np.ascontiguousarray(dist_xx, dtype=np.float64)
    dist_xy = np.ascontiguousarray(dist_xy, dtype=np.float64)
    kmat = np.ascontiguousarray(kmat, dtype=np.complex128)
    order = np.argsort(dist_xy, axis=1, kind="stable")
    dist_sorted = np.ascontiguousarray(np.take_along_axis(dist_xy, order, axis=1))
    order = np.ascontiguousarray(order, dtype=np.int_)
    with np.errstate(divide="ignore"):
        dist_pow = np.where(dist_xy > 0.0, dist_xy, 1.0) ** s2
    dist_pow[dist_xy == 0.0] = 0.0
    dist_pow = np.ascontiguousarray(dist_pow)
    return float(
        _impl.smoothness_scan(dist_xx, dist_sorted, order, dist_pow, kmat, float(s3))
    )


def pair_ratio_max_many(values, inv_omega):
    """Dispatch the batched pair-ratio scan; returns one max per row."""
    values = np.ascontiguousarray(np.atleast_2d(values), dtype=np.complex128)
    inv_omega = np.ascontiguousarray(inv_omega, dtype=np.float64)
    return np.asarray(_impl.pair_ratio_max_many(values, inv_omega))
