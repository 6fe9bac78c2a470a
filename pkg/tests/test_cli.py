import json
import subprocess
import sys

import numpy as np
import pytest

from uabayes import cli
from uabayes import experiments as ex
from uabayes.io import read_json, read_table_csv
from uabayes.properties import PropertyReport


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = cli.main([*args, "--out", str(out)])
    manifest = read_json(out / "manifest.json") if (out / "manifest.json").exists() else None
    return code, out, manifest


def test_properties(tmp_path):
    code, out, manifest = run(tmp_path, "properties", "--n-distributions", "5", "--n-atoms", "8", "--n-pairs", "3")
    assert code == 0 and manifest["status"] == "ok"
    report = read_json(out / "properties.json")
    assert report["passed"] and report["properties"]["entropy_monotone"]["checked"] == 5
    header, rows = read_table_csv(out / "scaling_curves.csv")
    assert header == ["alpha", "entropy_change", "kl_to_scaled"]
    assert ["1.0", "0.0"] == [r for r in rows if r[0] == "1.0"][0][:2]
    assert manifest["settings"]["n_distributions"] == 5


def test_properties_failure_exits_nonzero(tmp_path, monkeypatch, capsys):
    def failing(seed, *args):
        report = PropertyReport(seed)
        report.record("entropy_sign", 17, False)
        return report, np.zeros((1, 3))

    monkeypatch.setattr(ex, "run_properties", failing)
    code, _, manifest = run(tmp_path, "properties", "--seed", "99")
    assert code == 1 and manifest["status"] == "check_failed"
    err = capsys.readouterr().err
    assert "seed 99" in err and "17" in err


def test_fuse(tmp_path):
    code, out, _ = run(tmp_path, "fuse", "--prior", "1,1,2", "--likelihood", "3,1,0")
    assert code == 0
    header, rows = read_table_csv(out / "gaussian_families.csv")
    assert header[0] == "exponent" and len(rows) == 6
    header, rows = read_table_csv(out / "discrete_posteriors.csv")
    assert header == ["alpha", "beta", "p0", "p1", "p2"]
    np.testing.assert_allclose([float(v) for v in rows[0][2:]], [0.75, 0.25, 0.0])


def test_classify_generated(tmp_path):
    code, out, manifest = run(tmp_path, "classify", "--lam-step", "0.05", "--budget", "8")
    assert code == 0
    header, rows = read_table_csv(out / "accuracy_curve.csv")
    assert header == ["lambda", "accuracy"] and len(rows) == 21
    tuned = read_json(out / "tuned_lambda.json")
    assert tuned["evaluations"][0]["point"] == [0.5]
    assert manifest["summary"]["tuned_accuracy"] >= manifest["summary"]["baseline_accuracy"]


def test_classify_from_csv(tmp_path):
    rng = np.random.default_rng(0)
    for name, n in (("train.csv", 40), ("test.csv", 10)):
        y = np.arange(n) % 2
        X = rng.normal(size=(n, 2)) + 2 * y[:, None]
        lines = ["f0,f1,label"] + [f"{a!r},{b!r},{c}" for (a, b), c in zip(X.tolist(), y)]
        (tmp_path / name).write_text("\n".join(lines) + "\n")
    code, _, manifest = run(tmp_path, "classify", "--train-csv", str(tmp_path / "train.csv"),
                            "--test-csv", str(tmp_path / "test.csv"), "--budget", "3", "--lam-step", "0.1")
    assert code == 0 and manifest["settings"]["train_csv"].endswith("train.csv")


def test_classify_parse_error(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("f0,label\n1.0,0\noops,1\n")
    code, _, manifest = run(tmp_path, "classify", "--train-csv", str(tmp_path / "bad.csv"),
                            "--test-csv", str(tmp_path / "bad.csv"))
    assert code == 3 and manifest["status"] == "error"
    assert "row 2" in capsys.readouterr().err


def test_classify_needs_both_files(tmp_path):
    (tmp_path / "a.csv").write_text("f0,label\n1.0,0\n")
    code, _, _ = run(tmp_path, "classify", "--train-csv", str(tmp_path / "a.csv"))
    assert code == 3


def test_pf_deterministic_across_workers(tmp_path):
    args = ["pf", "--episodes", "3", "--horizon", "15", "--particles", "20,40", "--alphas", "0.25,1"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    a = (tmp_path / "a" / "pf_rtamse.csv").read_bytes()
    assert a == (tmp_path / "b" / "pf_rtamse.csv").read_bytes()
    header, rows = read_table_csv(tmp_path / "a" / "pf_rtamse.csv")
    assert header[:4] == ["n_particles", "alpha", "beta", "mean_rtamse"] and len(rows) == 4


def test_imm(tmp_path):
    code, out, manifest = run(tmp_path, "imm", "--episodes", "2", "--horizon", "12", "--step", "1")
    assert code == 0
    _, rows = read_table_csv(out / "imm_surface.csv")
    assert len(rows) == 16
    baseline = [float(r[2]) for r in rows if r[:2] == ["1.0", "1.0"]][0]
    assert baseline == pytest.approx(manifest["summary"]["baseline_rtamse"], rel=1e-12)
    assert manifest["summary"]["best_rtamse"] <= baseline
    header, traj = read_table_csv(out / "trajectory_episode0.csv")
    assert header[-1] == "mode_prob_2" and len(traj) == 12


def test_kalman(tmp_path):
    code, out, manifest = run(tmp_path, "kalman", "--episodes", "2", "--horizon", "10", "--step", "1")
    assert code == 0
    assert manifest["summary"]["best_rtamse"] <= manifest["summary"]["baseline_rtamse"]
    assert (out / "kalman_surface.csv").exists()


@pytest.mark.parametrize("method", ["grid", "surrogate"])
def test_tune_smooth(tmp_path, method):
    code, out, manifest = run(tmp_path, "tune", "--method", method, "--step", "0.5", "--budget", "6", "--seed", "4")
    assert code == 0
    result = read_json(out / "tuning_result.json")
    assert result["best_value"] <= manifest["summary"]["anchor_value"]
    assert manifest["summary"]["seconds"] >= 0
    assert (out / "tuning_trace.csv").read_text().startswith("index,x0,x1,value\n")


def test_tune_imm_surrogate(tmp_path):
    code, out, _ = run(tmp_path, "tune", "--target", "imm", "--budget", "3", "--episodes", "2", "--horizon", "10")
    assert code == 0
    assert read_json(out / "tuning_result.json")["evaluations"][0]["point"] == [1.0, 1.0]


def test_tune_classify_grid(tmp_path):
    code, out, _ = run(tmp_path, "tune", "--target", "classify", "--method", "grid", "--step", "0.25")
    assert code == 0
    assert len(read_json(out / "tuning_result.json")["evaluations"]) == 5


def test_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 12, "episodes": 7, "horizon": 9, "step": 0.5}))
    parser = cli.build_parser()
    s = cli.resolve_settings(parser.parse_args(["imm", "--config", str(cfg), "--episodes", "3"]))
    assert (s["seed"], s["episodes"], s["horizon"], s["step"]) == (12, 3, 9, 0.5)
    s = cli.resolve_settings(parser.parse_args(["imm", "--config", str(cfg), "--paper-scale"]))
    assert (s["episodes"], s["step"]) == (500, 0.01)
    s = cli.resolve_settings(parser.parse_args(["imm", "--paper-scale", "--step", "0.2"]))
    assert (s["episodes"], s["step"]) == (500, 0.2)
    s = cli.resolve_settings(parser.parse_args(["imm"]))
    assert (s["seed"], s["episodes"], s["step"], s["ua_kf"]) == (0, 100, 0.1, False)


def test_manifest_echoes_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5}))
    code, _, manifest = run(tmp_path, "fuse", "--config", str(cfg))
    assert code == 0
    assert manifest["settings"]["seed"] == 5 and manifest["config_file"] == str(cfg)
    assert manifest["command"] == "fuse" and "scenario_defaults" in manifest


def test_missing_config_is_usage_error(tmp_path):
    code = cli.main(["fuse", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)])
    assert code == 2


def test_bad_subcommand():
    with pytest.raises(SystemExit) as err:
        cli.main(["nope"])
    assert err.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uabayes", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in cli.COMMANDS:
        assert name in proc.stdout
