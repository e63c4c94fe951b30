"""End-to-end command-line behavior: JSON reports, exit codes, config."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from singint.cli import _parse_grid, main


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    return code, json.loads(out), err


# ---- grid specs ---------------------------------------------------------


def test_parse_grid_forms():
    dyadic = _parse_grid("dyadic:0.1:0.8")
    assert np.allclose(dyadic, [0.1, 0.2, 0.4, 0.8])
    geo = _parse_grid("geometric:0.01:1:5")
    assert geo.size == 5 and geo[0] == pytest.approx(0.01)
    lin = _parse_grid("linear:0:1:3")
    assert np.allclose(lin, [0.0, 0.5, 1.0])
    assert np.allclose(_parse_grid("explicit:0.3,0.7"), [0.3, 0.7])


@pytest.mark.parametrize(
    "spec", ["dyadic:0:1", "dyadic:1:0.5", "cubic:1:2", "geometric:1:2", "explicit:"]
)
def test_parse_grid_rejects(spec):
    with pytest.raises(ValueError, match="grid spec"):
        _parse_grid(spec)


# ---- reports and determinism -------------------------------------------


def test_kernel_norms_report(capsys):
    code, body, _ = run_json(
        capsys, ["kernel-norms", "--circle", "64", "--kernel", "riesz",
                 "--kernel-param", "s=0.5"]
    )
    assert code == 0
    assert body["command"] == "kernel-norms"
    assert body["backend"] in {"compiled", "python"}
    assert body["size_norm"] == pytest.approx(1.0, abs=1e-12)
    assert body["norm"] == body["size_norm"] + body["smoothness_norm"]
    assert body["augmented_norm"] >= body["norm"]


def test_reports_are_deterministic(capsys):
    argv = ["maximal-function", "--circle", "48", "--kernel", "riesz",
            "--kernel-param", "s=1", "--r-grid", "geometric:0.2:1.5:6"]
    _, body_a, _ = run_json(capsys, argv)
    _, body_b, _ = run_json(capsys, argv)
    body_a.pop("timestamp")
    body_b.pop("timestamp")
    assert body_a == body_b


def test_double_layer_necessity_flow(capsys):
    code, body, _ = run_json(
        capsys,
        ["necessity", "--circle", "256", "--kernel", "double_layer",
         "--beta", "1", "--upsilon", "1", "--s2", "2", "--s3", "1"],
    )
    assert code == 0
    assert body["verdict"] == "satisfied"
    assert body["operator_bound"]["value"] == pytest.approx(0.5, abs=1e-10)


# ---- exit codes ---------------------------------------------------------


def test_sphere_condition_failure_exits_two(capsys):
    code, body, _ = run_json(
        capsys,
        ["sphere-condition", "--two-point", "--rho-grid", "explicit:0.25",
         "--sphere-tolerance", "0.01"],
    )
    assert code == 2
    assert body["passed"] is False


def test_sphere_condition_pass_exits_zero(capsys):
    code, body, _ = run_json(
        capsys,
        ["sphere-condition", "--circle", "128", "--rho-grid",
         "linear:0.1:0.9:9"],
    )
    assert code == 0
    assert body["passed"] is True


def test_verify_lemmas_passes_on_circle(capsys):
    code, body, err = run_json(
        capsys, ["verify-lemmas", "--circle", "128", "--upsilon", "1"]
    )
    assert code == 0
    assert body["all_passed"] is True
    assert "truncated_sup: pass" in err


def test_hypothesis_failure_exits_two(capsys):
    # the two-point space leaves no radii inside the necessity window
    code, body, _ = run_json(
        capsys,
        ["necessity", "--two-point", "--kernel", "riesz", "--kernel-param",
         "s=0.5", "--beta", "0.5", "--upsilon", "1", "--s2", "1.2",
         "--s3", "0.5"],
    )
    assert code == 2
    assert body["kind"] == "hypothesis_violation"
    assert "window" in body["error"]


def test_sufficiency_inconsistent_exits_two(capsys):
    code, body, _ = run_json(
        capsys,
        ["sufficiency", "--circle", "64", "--kernel", "log_blowup",
         "--kernel-param", "upsilon=1", "--beta", "0.5", "--upsilon", "1",
         "--s2", "1.2", "--s3", "0.5"],
    )
    assert code == 2
    assert body["verdict"] == "hypotheses not met"


def test_unknown_kernel_exits_one(capsys):
    code, out, err = run_cli(
        capsys, ["kernel-norms", "--circle", "16", "--kernel", "nope"]
    )
    assert code == 1
    assert "unknown kernel" in json.loads(err)["error"]


def test_missing_kernel_param_exits_one(capsys):
    code, _, err = run_cli(
        capsys, ["kernel-norms", "--circle", "16", "--kernel", "riesz"]
    )
    assert code == 1
    assert "bad parameters for kernel 'riesz'" in json.loads(err)["error"]


def test_missing_space_exits_one(capsys):
    code, _, err = run_cli(capsys, ["kernel-norms", "--kernel", "riesz"])
    assert code == 1
    assert "no space given" in json.loads(err)["error"]


def test_bad_grid_exits_one(capsys):
    code, _, err = run_cli(
        capsys,
        ["maximal-function", "--circle", "16", "--kernel", "riesz",
         "--kernel-param", "s=1", "--r-grid", "cubic:1:2"],
    )
    assert code == 1
    assert "grid spec" in json.loads(err)["error"]


# ---- files: config, output, csv, function values ------------------------


def test_config_supplies_settings(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "space": {"preset": "circle", "n": 16},
        "kernel": {"name": "riesz", "params": {"s": 0.5}},
    }))
    code, body, _ = run_json(capsys, ["apply-q", "--config", str(cfg)])
    assert code == 0
    assert len(body["x_indices"]) == 16


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "space": {"preset": "circle", "n": 16},
        "kernel": {"name": "riesz", "params": {"s": 0.5}},
    }))
    code, body, _ = run_json(
        capsys, ["apply-q", "--config", str(cfg), "--circle", "24"]
    )
    assert code == 0
    assert len(body["x_indices"]) == 24


def test_unknown_config_section_exits_one(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"spaces": {"preset": "circle"}}))
    code, _, err = run_cli(
        capsys, ["kernel-norms", "--config", str(cfg), "--kernel", "riesz"]
    )
    assert code == 1
    assert "unknown config sections" in json.loads(err)["error"]


def test_unknown_config_key_exits_one(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"space": {"preset": "circle", "m": 4}}))
    code, _, err = run_cli(
        capsys, ["kernel-norms", "--config", str(cfg), "--kernel", "riesz"]
    )
    assert code == 1
    assert "config section 'space'" in json.loads(err)["error"]


def test_output_and_csv_files(capsys, tmp_path):
    out = tmp_path / "report.json"
    rows = tmp_path / "profile.csv"
    code, stdout, _ = run_cli(
        capsys,
        ["maximal-function", "--circle", "32", "--kernel", "riesz",
         "--kernel-param", "s=1", "--r-grid", "explicit:0.3,0.6,1.2",
         "--output", str(out), "--csv", str(rows)],
    )
    assert code == 0
    assert f"wrote {out}" in stdout
    report = json.loads(out.read_text())
    assert report["command"] == "maximal-function"
    lines = rows.read_text().strip().splitlines()
    assert lines[0] == "r,sup_tail"
    assert len(lines) == 4


def test_apply_q_values_file(capsys, tmp_path):
    fn = tmp_path / "g.json"
    fn.write_text(json.dumps({
        "indices": list(range(8)),
        "values": [0.0, 1.0, 0.5, -0.5, 2.0, 0.0, 1.5, -1.0],
    }))
    code, body, _ = run_json(
        capsys,
        ["apply-q", "--circle", "8", "--kernel", "riesz",
         "--kernel-param", "s=0.5", "--values", str(fn)],
    )
    assert code == 0
    assert len(body["values"]) == 8
    assert body["sup"] > 0.0


def test_values_file_rejects_unknown_keys(capsys, tmp_path):
    fn = tmp_path / "g.json"
    fn.write_text(json.dumps({"indices": [0], "values": [1.0], "extra": 1}))
    code, _, err = run_cli(
        capsys,
        ["apply-q", "--circle", "8", "--kernel", "riesz",
         "--kernel-param", "s=1", "--values", str(fn)],
    )
    assert code == 1
    assert "unknown keys in function file" in json.loads(err)["error"]


# ---- refine -------------------------------------------------------------


def test_refine_reports_observed_orders(capsys):
    code, body, _ = run_json(
        capsys,
        ["refine", "--resolutions", "64,128", "manifold-gradient",
         "--grad-kernel", "single_layer_log", "--mu", "coordinate:0"],
    )
    assert code == 0
    assert body["resolutions"] == [64, 128]
    values = body["headline"]["values"]
    assert len(values) == 2 and all(v > 0 for v in values)
    orders = body["headline"]["observed_orders"]
    assert len(orders) == 1
    assert orders[0] > 0.5  # residual shrinks under refinement


def test_refine_rejects_itself(capsys):
    code, _, err = run_cli(
        capsys, ["refine", "--resolutions", "8,16", "refine"]
    )
    assert code == 1
    assert "cannot rerun itself" in json.loads(err)["error"]


# ---- subprocess behavior ------------------------------------------------


def clean_env():
    env = {k: v for k, v in os.environ.items()
           if k not in {"OMP_NUM_THREADS", "AK_THREADS"}}
    env["PYTHONPATH"] = os.pathsep.join(sys.path)
    return env


def test_module_entry_point_help():
    proc = subprocess.run(
        [sys.executable, "-m", "singint", "--help"],
        capture_output=True, text=True, env=clean_env(),
    )
    assert proc.returncode == 0
    for name in ["necessity", "verify-lemmas", "manifold-gradient", "refine"]:
        assert name in proc.stdout


def test_thread_cap_applies_before_numerics():
    script = (
        "import os\n"
        "from singint.cli import main\n"
        "main(['sphere-condition', '--two-point', '--rho-grid',"
        " 'explicit:1.0'])\n"
        "print('OMP=' + os.environ.get('OMP_NUM_THREADS', 'unset'))\n"
    )
    env = clean_env()
    env["AK_THREADS"] = "3"
    proc = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0
    assert "OMP=3" in proc.stdout


def test_thread_cap_respects_existing_setting():
    script = (
        "import os\n"
        "from singint.cli import main\n"
        "main(['sphere-condition', '--two-point', '--rho-grid',"
        " 'explicit:1.0'])\n"
        "print('OMP=' + os.environ.get('OMP_NUM_THREADS', 'unset'))\n"
    )
    env = clean_env()
    env["AK_THREADS"] = "3"
    env["OMP_NUM_THREADS"] = "7"
    proc = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0
    assert "OMP=7" in proc.stdout


def test_force_python_flag(capsys):
    code, body, _ = run_json(
        capsys,
        ["kernel-norms", "--circle", "16", "--kernel", "riesz",
         "--kernel-param", "s=1", "--force-python"],
    )
    assert code == 0
    # the env override is set for subsequent backend selection
    assert os.environ.get("SINGINT_FORCE_PYTHON") == "1"
    os.environ.pop("SINGINT_FORCE_PYTHON", None)
