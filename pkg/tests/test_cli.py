import json
import subprocess
import sys
from importlib import resources

import pytest

from pushspread import cli
from pushspread.experiment import SweepResult
from pushspread.graph import read_graph

PETERSEN = str(resources.files("pushspread") / "data" / "petersen.adj")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_writes_edge_csv(tmp_path, capsys):
    path = tmp_path / "g.csv"
    code, _, err = run(capsys, "gen", "--n", "30", "--d", "3", "--seed", "4", "--out", str(path))
    assert code == 0 and "attempts=" in err and "simple=true" in err
    g = read_graph(path)
    assert (g.n, g.d) == (30, 3) and g.simple
    code, _, err = run(capsys, "gen", "--n", "30", "--d", "3", "--seed", "4", "--multigraph",
                       "--out", str(tmp_path / "m.csv"))
    assert code == 0 and "attempts=1" in err


def test_gen_odd_rejected(capsys):
    code, _, err = run(capsys, "gen", "--n", "5", "--d", "3")
    assert code == cli.EXIT_INPUT and "even" in err


def test_run_trace_schema(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "run", "--n", "3000", "--d", "3", "--seed", "2", "--mode", "incremental",
                       "--phase-exponent", "2", "--trace", str(path))
    assert code == 0
    summary = json.loads(out)
    trace = json.loads(path.read_text())
    assert summary["T"] == trace["T"] and summary["violations"] == 0
    assert {"n", "d", "mode", "seed", "T", "T0", "T1", "rounds"} <= set(trace)
    r0 = trace["rounds"][0]
    assert set(r0) == {"t", "I", "U", "N", "P", "A", "H"}
    assert len(r0["H"]) == 3


def test_run_on_graph_file(capsys):
    code, out, _ = run(capsys, "run", "--graph", PETERSEN, "--seed", "1", "--start", "3")
    assert code == 0 and json.loads(out)["coverage"] == 10
    code, _, _ = run(capsys, "run", "--seed", "1")
    assert code == cli.EXIT_INPUT


def test_theory_csv(capsys):
    code, out, _ = run(capsys, "theory", "--n", "100000", "--d", "3", "--phase-exponent", "3")
    assert code == 0
    lines = out.splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# C_d=4.298") for l in header)
    assert any(l.startswith("# predicted_T=") for l in header)
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "t,p,u,f,r"
    code, out, _ = run(capsys, "theory", "--n", "100000", "--d", "3", "--p0", "500", "--u0", "99000",
                       "--out", "json")
    data = json.loads(out)
    assert data["rows"][0]["p"] == 500


def test_spectral_and_typicality(capsys):
    code, out, _ = run(capsys, "spectral", "--graph", PETERSEN, "--out", "json")
    data = json.loads(out)
    assert code == 0 and data["lambda"] == pytest.approx(2)
    assert data["alon_boppana_slack"] < 0
    code, out, _ = run(capsys, "typicality", "--graph", PETERSEN, "--eps", "0.3", "--budget", "50",
                       "--seed", "1", "--out", "json")
    data = json.loads(out)
    assert code == 0 and data["exhaustive"] and "condition3" in data


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "chernoff", "--mu", "100", "--t", "30")
    data = json.loads(out)
    assert data["bound"] == pytest.approx(0.0334, abs=1e-4) and data["informative"]
    code, out, _ = run(capsys, "bounds", "talagrand", "--m", "100", "--t", "50", "--r", "3", "--c", "2")
    data = json.loads(out)
    assert data["bound"] == 1.0 and not data["informative"]
    code, _, err = run(capsys, "bounds", "chernoff", "--mu", "-1", "--t", "3")
    assert code == cli.EXIT_INPUT


def test_sweep(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"cells": [{"kind": "random-regular", "n": 100, "d": 3}],
                                "runs": 4, "seed": 1, "mode": "incremental", "retain": "summary"}))
    code, out, _ = run(capsys, "sweep", "--spec", str(spec), "--workers", "1", "--out-dir", str(tmp_path / "o"))
    assert code == 0 and "rr-n100-d3" in out
    assert (tmp_path / "o" / "summary.csv").exists()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cells": [{"kind": "random-regular", "n": 5, "d": 3}], "runs": 1}))
    code, _, err = run(capsys, "sweep", "--spec", str(bad))
    assert code == cli.EXIT_INPUT and "cell 0" in err


def test_sweep_exit_code_on_violation(tmp_path, capsys, monkeypatch):
    fake = SweepResult(summaries=[], records=[{"violations": 2}])
    monkeypatch.setattr(cli, "sweep", lambda *a, **k: fake)
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"cells": [{"kind": "complete", "n": 5}], "runs": 1}))
    code, _, err = run(capsys, "sweep", "--spec", str(spec))
    assert code == cli.EXIT_VIOLATION and "violations" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "pushspread", "bounds", "chernoff", "--mu", "1", "--t", "0"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["bound"] == 1.0
