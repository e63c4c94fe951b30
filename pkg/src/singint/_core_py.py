"""Pure numpy implementations of the norm scan inner loops.

Same signatures as the compiled module singint._core; see singint._accel
for the selection logic.
"""

import numpy as np


def smoothness_scan(dist_xx, dist_xy_sorted, order_xy, dist_pow_s2, kmat, s3):
    """Max of d(x1,y)^s2 |K(x1,y)-K(x2,y)| / d(x1,x2)^s3 over admissible triples.

    Vectorized over (x1, y) with a python loop over x2 only. The sorted
    arguments are accepted for signature parity with the compiled scan; the
    admissibility cut d(x1,y) >= 2 d(x1,x2) is applied by masking instead.
    """
    nx, ny = kmat.shape
    dist_xy = np.take_along_axis(
        dist_xy_sorted, np.argsort(order_xy, axis=1, kind="stable"), axis=1
    )
    best = 0.0
    for i2 in range(nx):
        d12 = dist_xx[:, i2]
        ok = d12 > 0.0
        if not np.any(ok):
            continue
        vals = dist_pow_s2 * np.abs(kmat - kmat[i2, :][None, :])
        vals[dist_xy < 2.0 * d12[:, None]] = 0.0
        row_best = vals.max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(ok, row_best / np.where(ok, d12, 1.0) ** s3, 0.0)
        best = max(best, float(ratios.max()))
    return best


def pair_ratio_max_many(values, inv_omega):
    """Per row of values, max over i<j of |v_i - v_j| * inv_omega[i, j]."""
    m = values.shape[0]
    out = np.zeros(m)
    for k in range(m):
        v = values[k]
        diff = np.abs(v[:, None] - v[None, :]) * inv_omega
        out[k] = float(diff.max()) if diff.size else 0.0
    return out
