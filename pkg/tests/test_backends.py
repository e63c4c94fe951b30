"""Compiled and pure-Python compute cores must agree with a slow oracle."""

import os
import subprocess
import sys

import numpy as np
import pytest

from singint import _accel, _core_py
from singint.kernels import kernel_matrix, riesz

from conftest import random_space


def oracle_smoothness_scan(dist_xx, dist_xy, kmat, s2, s3):
    """Direct triple loop over the admissible pair-smoothness triples."""
    nx, ny = dist_xy.shape
    best = 0.0
    for i1 in range(nx):
        for i2 in range(nx):
            d12 = dist_xx[i1, i2]
            if d12 <= 0.0:
                continue
            for j in range(ny):
                d1y = dist_xy[i1, j]
                if d1y < 2.0 * d12 or d1y <= 0.0:
                    continue
                val = d1y**s2 * abs(kmat[i1, j] - kmat[i2, j]) / d12**s3
                best = max(best, val)
    return best


def oracle_pair_ratio(values, inv_omega):
    n = values.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(n):
            if inv_omega[i, j] > 0.0:
                best = max(best, abs(values[i] - values[j]) * inv_omega[i, j])
    return best


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_smoothness_scan_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    space = random_space(rng, n_points=6)
    kernel = riesz(0.5)
    kmat = kernel_matrix(space, kernel)
    expected = oracle_smoothness_scan(
        space.dist_xx, space.dist_xy, kmat.astype(np.complex128), 1.5, 1.0
    )
    got = _accel.smoothness_scan(space.dist_xx, space.dist_xy, kmat, 1.5, 1.0)
    assert got == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("seed", [3, 4])
def test_smoothness_scan_complex_kernel(seed):
    rng = np.random.default_rng(seed)
    space = random_space(rng, n_points=5)
    kvals = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    np.fill_diagonal(kvals, 0.0)
    expected = oracle_smoothness_scan(space.dist_xx, space.dist_xy, kvals, 1.2, 0.7)
    got = _accel.smoothness_scan(space.dist_xx, space.dist_xy, kvals, 1.2, 0.7)
    assert got == pytest.approx(expected, rel=1e-13)


def test_backends_agree_on_smoothness():
    rng = np.random.default_rng(7)
    space = random_space(rng, n_points=8)
    kmat = kernel_matrix(space, riesz(1.0))
    compiled = _accel.smoothness_scan(space.dist_xx, space.dist_xy, kmat, 2.0, 1.0)

    order = np.argsort(space.dist_xy, axis=1, kind="stable")
    sorted_d = np.take_along_axis(space.dist_xy, order, axis=1)
    dist_pow = np.zeros_like(space.dist_xy)
    pos = space.dist_xy > 0.0
    dist_pow[pos] = space.dist_xy[pos] ** 2.0
    fallback = _core_py.smoothness_scan(
        np.ascontiguousarray(space.dist_xx),
        np.ascontiguousarray(sorted_d),
        np.ascontiguousarray(order),
        np.ascontiguousarray(dist_pow),
        np.ascontiguousarray(kmat, dtype=np.complex128),
        1.0,
    )
    assert compiled == pytest.approx(fallback, rel=1e-14)


@pytest.mark.parametrize("seed", [0, 5])
def test_pair_ratio_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 7
    dist = np.abs(rng.normal(size=(n, n)))
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    inv_omega = np.zeros_like(dist)
    mask = dist > 0.0
    inv_omega[mask] = 1.0 / np.sqrt(dist[mask])
    values = rng.normal(size=(3, n)) + 1j * rng.normal(size=(3, n))
    got = _accel.pair_ratio_max_many(values, inv_omega)
    for k in range(3):
        assert got[k] == pytest.approx(oracle_pair_ratio(values[k], inv_omega), rel=1e-13)


def test_force_python_env_selects_fallback():
    code = (
        "import singint._accel as a; print(a.backend_name())"
    )
    env = dict(os.environ, SINGINT_FORCE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "python"


def test_backend_name_reports_selection():
    assert _accel.backend_name() in {"compiled", "python"}
    if _accel.HAVE_COMPILED:
        assert _accel.backend_name() == "compiled"
