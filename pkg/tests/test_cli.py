from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from prsclt.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY, config_digest, main

FIX = Path(__file__).parent / "fixtures"


def _run(*args: str) -> int:
    return main(list(args))


def test_analytic_report(tmp_path):
    out = tmp_path / "a.json"
    assert _run("analytic", "--config", str(FIX / "analytic_identity.json"), "--out", str(out)) == EXIT_OK
    laws = json.loads(out.read_text())["laws"]
    assert len(laws) == 7
    first = laws[0]
    assert first["center"] == pytest.approx(0.40825, abs=1e-5)
    assert {"estimator", "level", "center", "sd", "eta", "rate_tag", "inputs"} <= set(first)
    manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert manifest["outputs"] == [str(out)]
    assert len(manifest["config_digest"]) == 64


def test_analytic_degenerate_entry(tmp_path):
    out = tmp_path / "d.json"
    assert _run("analytic", "--config", str(FIX / "analytic_null.json"), "--out", str(out)) == EXIT_OK
    assert json.loads(out.read_text())["laws"][0]["degenerate"] is True


def test_malformed_json_reports_position(capsys):
    assert _run("analytic", "--config", str(FIX / "malformed.json")) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_bad_field_is_config_error(tmp_path, capsys):
    doc = json.loads((FIX / "analytic_identity.json").read_text())
    doc["population"]["h2"] = 1.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert _run("analytic", "--config", str(path)) == EXIT_CONFIG
    assert "h2" in capsys.readouterr().err


def test_missing_config_file():
    assert _run("analytic", "--config", "/nonexistent/x.json") == EXIT_CONFIG


def test_unknown_subcommand():
    assert _run("frobnicate", "--config", "x") == EXIT_CONFIG


def test_simulate_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(FIX / "simulate_smoke.json")
    assert _run("simulate", "--config", cfg, "--out", str(a), "--workers", "1") == EXIT_OK
    assert _run("simulate", "--config", cfg, "--out", str(b), "--workers", "2") == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(a.open()))
    assert len(rows) == 25
    assert all(r["flags"] == "false" for r in rows)
    assert (tmp_path / "a.csv.manifest.json").exists()


def test_seed_flag_and_env_override(tmp_path, monkeypatch):
    cfg = str(FIX / "simulate_smoke.json")
    base, flag, env = tmp_path / "base.csv", tmp_path / "flag.csv", tmp_path / "env.csv"
    _run("simulate", "--config", cfg, "--out", str(base), "--workers", "1")
    _run("simulate", "--config", cfg, "--out", str(flag), "--workers", "1", "--seed", "99")
    monkeypatch.setenv("PRSCLT_SEED", "99")
    _run("simulate", "--config", cfg, "--out", str(env), "--workers", "1")
    assert base.read_bytes() != flag.read_bytes()
    assert flag.read_bytes() == env.read_bytes()


def test_bad_env_worker_count(tmp_path, monkeypatch):
    monkeypatch.setenv("PRSCLT_WORKERS", "many")
    code = _run("simulate", "--config", str(FIX / "simulate_smoke.json"), "--out", str(tmp_path / "x.csv"))
    assert code == EXIT_CONFIG


def test_simulate_requires_out():
    assert _run("simulate", "--config", str(FIX / "simulate_smoke.json")) == EXIT_CONFIG


def test_runtime_failure_exit_code(tmp_path, capsys):
    code = _run("simulate", "--config", str(FIX / "runtime_failure.json"), "--out", str(tmp_path / "f.csv"))
    assert code == EXIT_RUNTIME
    assert "seed" in capsys.readouterr().err


def test_verify_pass(tmp_path):
    out = tmp_path / "v.json"
    assert _run("verify", "--config", str(FIX / "verify_individual.json"), "--out", str(out), "--workers", "1") == EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert {c["name"] for c in report["checks"]} == {"ks", "mean", "variance_ratio", "coverage"}
    assert all({"name", "value", "threshold", "pass"} <= set(c) for c in report["checks"])


def test_verify_zero_threshold_fails():
    assert _run("verify", "--config", str(FIX / "verify_zero.json"), "--workers", "1") == EXIT_VERIFY


def test_verify_missing_thresholds():
    assert _run("verify", "--config", str(FIX / "verify_missing.json")) == EXIT_CONFIG


def _sweep(tmp_path, name: str) -> list[dict[str, str]]:
    out = tmp_path / f"{name}.csv"
    assert _run("sweep", "--config", str(FIX / f"{name}.json"), "--out", str(out)) == EXIT_OK
    return list(csv.DictReader(out.open()))


def test_sweep_lambda_tilting_monotone(tmp_path):
    rows = _sweep(tmp_path, "sweep_lambda")
    tilt = [float(r["tilting"]) for r in rows]
    assert len(rows) == 5 and all(a <= b for a, b in zip(tilt, tilt[1:]))


def test_sweep_n_center_monotone(tmp_path):
    rows = _sweep(tmp_path, "sweep_n")
    centers = [float(r["center"]) for r in rows]
    assert all(a <= b for a, b in zip(centers, centers[1:]))
    assert list(rows[0]) == ["parameter", "value", "estimator", "level", "center", "sd", "eta", "tilting", "degenerate"]


def test_sweep_single_point_and_empty(tmp_path):
    doc = json.loads((FIX / "sweep_n.json").read_text())
    doc["sweep"]["values"] = [200]
    path = tmp_path / "one.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "one.csv"
    assert _run("sweep", "--config", str(path), "--out", str(out)) == EXIT_OK
    assert len(list(csv.DictReader(out.open()))) == 1
    assert _run("sweep", "--config", str(FIX / "sweep_empty.json")) == EXIT_CONFIG


def test_sweep_over_dimension_rebuilds_covariance(tmp_path):
    doc = json.loads((FIX / "sweep_n.json").read_text())
    doc["sweep"] = {"parameter": "m", "values": [10, 50, 100], "laws": [{"estimator": "marginal", "level": "accuracy"}]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    assert _run("sweep", "--config", str(path), "--out", str(tmp_path / "m.csv")) == EXIT_OK


def test_digest_stable_under_key_order():
    assert config_digest({"a": 1, "b": [1, 2]}) == config_digest({"b": [1, 2], "a": 1})


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "prsclt", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "prsclt" in proc.stdout
