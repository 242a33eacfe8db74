import json
import subprocess
import sys

import pytest

from fracfvt.cli import main


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_fvt_constant_three_orders(tmp_path):
    code, rep = run(["fvt", "--fn", "const1", "--alpha", "0,0.5,2"], tmp_path)
    assert code == 0
    assert rep["schema_version"] == 1
    assert [r["status"] for r in rep["records"]] == ["pass"] * 3


def test_fvt_t2_sin(tmp_path):
    code, rep = run(["fvt", "--fn", "tq_sin", "--q", "2", "--omega", "1", "--alpha", "2"], tmp_path)
    assert code == 0
    rec = rep["records"][0]
    assert rec["status"] == "pass" and abs(rec["outputs"]["G"]) <= 2e-2


def test_fvt_unknown_function(capsys):
    assert main(["fvt", "--fn", "nosuch"]) == 2
    err = capsys.readouterr().err
    assert "const1" in err and "tq_sin" in err


def test_fvt_bad_parameter(capsys):
    assert main(["fvt", "--fn", "const1", "--q", "2"]) == 2


def test_fvt_fail_exit_code(tmp_path, monkeypatch):
    from fracfvt import finval
    from fracfvt.report import ReportRecord

    def disagree(f, alpha, **kw):
        return ReportRecord(f"fvt:{f.name}", {}, {"L": 1.0, "G": 0.0, "K": 0.0, "gap_G": 1.0}, "fail", {"gap_G": 1e-2})

    monkeypatch.setattr(finval, "cross_validate", disagree)
    code, rep = run(["fvt", "--fn", "const1"], tmp_path)
    assert code == 1 and rep["records"][0]["status"] == "fail"


def test_fvt_csv_and_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fn": "two_plus_cos3", "alpha": [0, 1]}))
    csv_path = tmp_path / "t.csv"
    code, rep = run(["fvt", "--config", str(cfg), "--csv", str(csv_path)], tmp_path)
    assert code == 0 and len(rep["records"]) == 2
    assert csv_path.read_text().splitlines()[0] == "function,alpha,L,G,K,status"
    # flags override the file
    code, rep = run(["fvt", "--config", str(cfg), "--alpha", "0.5"], tmp_path, "o2.json")
    assert [r["inputs"]["alpha"] for r in rep["records"]] == [0.5]


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nosuch": 1}))
    assert main(["fvt", "--fn", "const1", "--config", str(bad)]) == 2
    assert main(["fvt", "--fn", "const1", "--config", str(tmp_path / "missing.json")]) == 2
    bad.write_text("{not json")
    assert main(["fvt", "--fn", "const1", "--config", str(bad)]) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACFVT_THREADS", "3")
    code, rep = run(["fvt", "--fn", "const1", "--alpha", "0,1,2"], tmp_path)
    assert code == 0 and [r["inputs"]["alpha"] for r in rep["records"]] == [0, 1, 2]
    monkeypatch.setenv("FRACFVT_THREADS", "zero")
    assert main(["fvt", "--fn", "const1"]) == 2


def test_fode_rotation(tmp_path):
    csv_path = tmp_path / "scan.csv"
    code, rep = run(["fode", "--rhs", "rotation", "--alpha", "0.8", "--scan", "1:20:60", "--csv", str(csv_path)], tmp_path)
    assert code == 0
    rec = rep["records"][0]
    assert rec["status"] == "pass"
    assert rec["outputs"]["min_residual"] >= 0.05
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "T,residual" and len(lines) == 61


def test_fode_alpha_one_rejected(capsys):
    assert main(["fode", "--rhs", "rotation", "--alpha", "1.0"]) == 2
    assert "alpha" in capsys.readouterr().err


def test_fode_zero_inconclusive(tmp_path):
    code, rep = run(["fode", "--rhs", "zero", "--alpha", "0.5"], tmp_path)
    rec = rep["records"][0]
    assert code == 0 and rec["status"] == "inconclusive"
    assert rec["outputs"]["min_residual"] == 0 and rec["outputs"]["nonconstancy"] == 0


def test_fode_usage_errors():
    assert main(["fode", "--rhs", "nosuch", "--alpha", "0.5"]) == 2
    assert main(["fode", "--rhs", "rotation", "--alpha", "0.5", "--scan", "5:1:3"]) == 2
    assert main(["fode", "--rhs", "rotation", "--alpha", "0.5", "--horizon", "1", "--h", "0.3"]) == 2
    assert main(["fode", "--rhs", "rotation", "--alpha", "0.5", "--x0", "1"]) == 2
    assert main(["fode", "--rhs", "rotation", "--alpha", "0.5", "--scan", "1:40:5"]) == 2
    assert main(["fode", "--rhs", "linear_decay", "--alpha", "0.5", "--param", "rate"]) == 2


def test_fode_params(tmp_path):
    code, rep = run(["fode", "--rhs", "linear_decay", "--alpha", "0.5", "--param", "rate=2", "--horizon", "20", "--scan", "1:5:5"], tmp_path)
    assert rep["records"][0]["inputs"]["params"] == {"rate": 2.0}


def test_verify_filter_and_tol_scale(tmp_path, capsys):
    code = main(["verify", "--only", "fraccalc", "--out", str(tmp_path / "v.json")])
    out = capsys.readouterr().out
    assert code == 0 and "4." in out and "1/1 passed" in out
    rep = json.loads((tmp_path / "v.json").read_text())
    assert rep["records"][0]["experiment_id"] == "criterion:4"
    # the semigroup defect is ~8e-8, above 1e-3 * 1e-6
    assert main(["verify", "--only", "fraccalc", "--tol-scale", "1e-6"]) == 1
    assert main(["verify", "--only", "nosuch"]) == 2
    assert main(["verify", "--tol-scale", "0"]) == 2


def test_usage_without_subcommand():
    assert main([]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fracfvt", "fvt", "--fn", "nosuch"], capture_output=True, text=True
    )
    assert proc.returncode == 2
