"""Truncated Riesz sums and the regularity-driven inequalities."""

import numpy as np
import pytest

from singint.bounds import (
    ball_growth_report,
    log_tail_report,
    riesz_ball_sums,
    riesz_tail_sums,
    sup_riesz_potential,
    tail_decay_report,
    truncated_riesz_bound,
    truncated_sup_report,
    verify_bounds,
)
from singint.space import (
    ahlfors_constant_all_radii,
    ball_measure,
    cantor_space,
    random_cloud,
    two_point_space,
)

from conftest import random_space


# ---- oracles -----------------------------------------------------------


def oracle_ball_sum(space, i, s, r):
    """Open ball, center punctured for s > 0."""
    total = 0.0
    for j in range(space.y_indices.size):
        d = space.dist_xy[i, j]
        if d >= r:
            continue
        if d == 0.0:
            total += space.w_y[j] if s == 0.0 else 0.0
        else:
            total += space.w_y[j] * d ** (-s)
    return total


def oracle_tail_sum(space, i, s, r):
    total = 0.0
    for j in range(space.y_indices.size):
        d = space.dist_xy[i, j]
        if d >= r and d > 0.0:
            total += space.w_y[j] * d ** (-s)
    return total


# ---- truncated sums vs oracles -----------------------------------------


@pytest.mark.parametrize("s", [0.0, 0.5, 1.3])
def test_ball_sums_match_oracle(circle_64, s):
    grid = np.array([0.05, 0.25, 1.0, 2.5])
    r, values = riesz_ball_sums(circle_64, s, grid)
    for jr, rv in enumerate(r):
        for i in [0, 21, 63]:
            assert values[i, jr] == pytest.approx(
                oracle_ball_sum(circle_64, i, s, rv), rel=1e-13, abs=1e-15
            )


@pytest.mark.parametrize("s", [0.5, 1.3])
def test_tail_sums_match_oracle(circle_64, s):
    grid = np.array([0.05, 0.25, 1.0])
    r, values = riesz_tail_sums(circle_64, s, grid)
    for jr, rv in enumerate(r):
        for i in [0, 11, 50]:
            assert values[i, jr] == pytest.approx(
                oracle_tail_sum(circle_64, i, s, rv), rel=1e-13
            )


def test_tail_boundary_keeps_realized_distance(circle_64):
    # r equal to a realized chord: that sphere belongs to the tail
    r = circle_64.dist[0, 4]
    _, values = riesz_tail_sums(circle_64, 0.5, np.array([r]))
    assert values[0, 0] == pytest.approx(
        oracle_tail_sum(circle_64, 0, 0.5, r), rel=1e-14
    )


def test_sup_potential_s_zero_is_total_measure_bitwise():
    for space in [
        cantor_space(4),
        random_cloud(30, dim=2, seed=1),
        two_point_space(),
    ]:
        assert sup_riesz_potential(space, 0.0) == float(space.w_y.sum())


def test_sup_potential_s_zero_with_radius_is_ball_measure(circle_64):
    for r in [0.07, 0.5, 1.7]:
        want = max(
            ball_measure(circle_64, int(x), r) for x in circle_64.x_indices
        )
        assert sup_riesz_potential(circle_64, 0.0, radius=r) == pytest.approx(
            want, rel=1e-15
        )


def test_sup_potential_radius_below_mesh(circle_64):
    # below the mesh gap only the center remains in the open ball
    val = sup_riesz_potential(circle_64, 0.0, radius=0.5 * circle_64.h_min)
    assert val == pytest.approx(float(circle_64.w_y.max()), rel=1e-15)
    assert sup_riesz_potential(circle_64, 0.5, radius=0.5 * circle_64.h_min) == 0.0


def test_sup_potential_rejects_bad_args(circle_64):
    with pytest.raises(ValueError, match="nonnegative"):
        sup_riesz_potential(circle_64, -0.5)
    with pytest.raises(ValueError, match="radius"):
        sup_riesz_potential(circle_64, 0.5, radius=0.0)


# ---- the exact inequalities --------------------------------------------


def test_truncated_sup_inequality_circle(circle_256):
    upsilon = 1.0
    grid = np.geomspace(2.0 * circle_256.h_min, 2.0, 20)
    report = truncated_sup_report(circle_256, 0.5, upsilon, a_grid=grid)
    assert report.passed  # exact inequality, zero tolerance
    assert np.all(report.per_r <= report.comparison)


def test_truncated_sup_inequality_cantor():
    space = cantor_space(5)
    upsilon = np.log(2.0) / np.log(3.0)
    report = truncated_sup_report(space, 0.3, upsilon)
    assert report.passed


def test_truncated_sup_inequality_cloud():
    space = random_cloud(40, dim=2, seed=3)
    report = truncated_sup_report(space, 0.5, 2.0)
    assert report.passed


def test_truncated_bound_monotone_pieces(circle_64):
    # the two layer-cake pieces: values below the cap plus the tail above
    c = ahlfors_constant_all_radii(circle_64, 1.0)
    r = 0.3
    got = truncated_riesz_bound(circle_64, 0.5, 1.0, r, constant=c)
    want = circle_64.w_y.sum() * r**-0.5 + c * (1.0 / 0.5) * r**0.5
    assert got == pytest.approx(want, rel=1e-15)
    with pytest.raises(ValueError, match="0 <= s < upsilon"):
        truncated_riesz_bound(circle_64, 1.5, 1.0, r)


def test_ball_growth_exact_circle(circle_256):
    report = ball_growth_report(circle_256, 0.5, 1.0)
    assert report.passed
    assert report.measured_constant <= report.predicted_constant
    assert report.stable


def test_ball_growth_exact_random_spaces():
    rng = np.random.default_rng(7)
    for _ in range(5):
        space = random_space(rng)
        report = ball_growth_report(space, 0.5, 2.0)
        assert report.passed


def test_tail_decay_exact_circle(circle_256):
    report = tail_decay_report(circle_256, 1.5, 1.0)
    assert report.passed
    assert report.measured_constant <= report.predicted_constant


def test_tail_decay_needs_supercritical_exponent(circle_64):
    with pytest.raises(ValueError, match="s > upsilon"):
        tail_decay_report(circle_64, 0.5, 1.0)
    with pytest.raises(ValueError, match="0 <= s < upsilon"):
        ball_growth_report(circle_64, 1.5, 1.0)


def test_log_tail_coefficient_near_two(circle_512):
    # the balanced tail on the unit circle grows like 2 |log t| + const
    report = log_tail_report(circle_512, 1.0)
    assert report.fit_coefficient == pytest.approx(2.0, abs=0.5)
    assert report.passed


def test_log_tail_rejects_empty_window():
    space = random_cloud(4, dim=2, seed=0)
    # 4 far-apart points: h_min is comparable to the diameter
    if 1.5 * space.h_min >= 1.0 / np.e:
        with pytest.raises(ValueError):
            log_tail_report(space, 1.0)
    else:
        report = log_tail_report(space, 1.0)
        assert report.r_values.size >= 2


def test_verify_bounds_keys_and_verdicts(circle_256):
    reports = verify_bounds(circle_256, 1.0)
    assert set(reports) == {
        "truncated_sup",
        "ball_growth",
        "tail_decay",
        "log_tail",
    }
    for name in ["truncated_sup", "ball_growth", "tail_decay"]:
        assert reports[name].passed, reports[name].detail
    assert reports["log_tail"].fit_coefficient is not None
    payload = {k: v.to_dict() for k, v in reports.items()}
    assert payload["ball_growth"]["predicted_constant"] > 0.0
