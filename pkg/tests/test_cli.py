from __future__ import annotations

import json
import shutil

from cli import main
from core.instance_io import load


def _json_out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_solve_json(instance_dir, capsys):
    code = main(["solve", str(instance_dir / "eq12.dmip"), "--delta", "3", "--json"])
    assert code == 0
    out = _json_out(capsys)
    assert out["state"] == "finished_opt"
    assert out["value"] == "1"
    assert out["nodes"] == 2
    assert out["delta"] == {"delta": 3, "provenance": "UserSupplied"}
    assert out["incumbent"] == ["1/3", "2/3", "1", "0"]


def test_solve_epsilon_with_trace(instance_dir, capsys):
    code = main(["solve", str(instance_dir / "eq12.dmip"), "--variant", "eps", "--epsilon", "1/10", "--trace"])
    assert code == 0
    out = capsys.readouterr().out
    assert "state: finished_nosol" in out
    assert "value: -" in out
    assert "node 3 parent 2 action prune-infeas value -" in out


def test_solve_epsilon_needs_a_value(instance_dir):
    assert main(["solve", str(instance_dir / "eq12.dmip"), "--variant", "eps"]) == 1


def test_solve_baseline(instance_dir, capsys):
    assert main(["solve", str(instance_dir / "cfl_small.dmip"), "--variant", "baseline", "--json"]) == 0
    out = _json_out(capsys)
    assert (out["state"], out["value"], out["variant"]) == ("finished_opt", "108", "baseline")


def test_missing_file_is_a_runtime_error(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.dmip")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_usage_errors(instance_dir):
    assert main(["solve", str(instance_dir / "eq12.dmip"), "--frobnicate"]) == 1
    assert main(["solve", str(instance_dir / "eq12.dmip"), "--delta", "0"]) == 1
    assert main(["nosuchcommand"]) == 1


def test_regularity_methods(instance_dir, capsys):
    assert main(["regularity", str(instance_dir / "A1.mat")]) == 0
    assert capsys.readouterr().out.strip() == "5"

    assert main(["regularity", str(instance_dir / "A5.mat"), "--method", "bounds"]) == 0
    out = capsys.readouterr().out
    assert "hadamard: 27720" in out
    assert "nonsquare: 12" in out

    assert main(["regularity", str(instance_dir / "cfl_small.dmip"), "--method", "theorem"]) == 0
    assert capsys.readouterr().out.strip() == "12 TheoremCFL"

    # no model metadata
    assert main(["regularity", str(instance_dir / "eq12.dmip"), "--method", "theorem"]) == 2

    assert main(["regularity", str(instance_dir / "eq12.dmip")]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_regularity_cap(instance_dir):
    assert main(["regularity", str(instance_dir / "A3.mat"), "--cap", "1"]) == 2


def test_generate(tmp_path, capsys):
    target = tmp_path / "gen" / "misl.dmip"
    code = main(["generate", "--model", "misl", "--items", "2", "--periods", "2", "--seed", "3", "--out", str(target)])
    assert code == 0
    mip = load(target)
    assert mip.name == "misl_2x2_s3"
    assert capsys.readouterr().out.strip() == f"{target} delta={mip.delta}"
    assert main(["generate", "--model", "cfl", "--clients", "2", "--out", str(target)]) == 1


def test_experiment(instance_dir, tmp_path, capsys):
    source = tmp_path / "instances"
    source.mkdir()
    shutil.copy(instance_dir / "eq12.dmip", source)
    out = tmp_path / "runs.csv"
    code = main(["experiment", "--dir", str(source), "--variants", "delta:3,eps:1/10", "--out", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 3
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["variants"] == ["delta3", "eps1/10"]
    assert main(["experiment", "--dir", str(source), "--variants", "gomory", "--out", str(out)]) == 1


def test_experiment_default_variants(instance_dir, tmp_path):
    source = tmp_path / "instances"
    source.mkdir()
    shutil.copy(instance_dir / "eq12.dmip", source)
    out = tmp_path / "runs.csv"
    assert main(["experiment", "--dir", str(source), "--node-limit", "500", "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["variants"] == ["delta", "eps1/10", "eps1/100", "eps1/1000", "eps1/10000"]
    assert summary["reference_variant"] == "delta"
    assert len(out.read_text().splitlines()) == 6


def test_experiment_on_generated_suite(tmp_path):
    out = tmp_path / "runs.csv"
    code = main([
        "experiment", "--suite", "1", "--shapes", "small", "--seed", "3", "--max-instances", "2",
        "--variants", "eps:1/10", "--node-limit", "2000", "--time-limit", "20", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["variants"] == ["eps1/10"]
    assert len(summary["nodes"]) + len(summary["skipped"]) + len(summary["excluded"]) >= 1
