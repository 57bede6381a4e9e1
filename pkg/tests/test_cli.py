import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from sensorcontract.cli import load_config, main
from sensorcontract.model import REFERENCE, ConfigError

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "reference.yaml"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_reference_config_loads():
    assert load_config(CONFIG) == REFERENCE


def test_nested_config(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("b: 2\nx_bar: 1\nC: 0.2\ndelta: 0.9\nbenefit:\n  family: power\n  a: 2\n  shape: 0.5\n")
    assert load_config(p) == REFERENCE


@pytest.mark.parametrize("text", ["b: [1, 2\n", "just a string\n", "b: 2\n", "b: 2\nx_bar: 1\nC: 0.2\ndelta: 0.9\n"
                                  "benefit.family: power\nbenefit.a: 2\nbenefit.shape: 0.5\nextra: 1\n"])
def test_bad_configs(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)


def test_solve_omega_one(capsys):
    code, out, _ = run(capsys, "solve", CONFIG, "--omega", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["h"] == 2 and rep["q"] == 0.9 and rep["gamma"] == 0
    assert rep["omega_objective"] == 0.025
    assert rep["value"] == 0.475 and rep["efforts"] == [0.25, 0.25]


def test_solve_usage_errors(capsys, tmp_path):
    assert run(capsys, "solve", CONFIG, "--omega", "0")[0] == 2
    assert run(capsys, "solve", tmp_path / "missing.yaml", "--omega", "1")[0] == 2
    assert run(capsys, "solve", CONFIG)[0] == 2
    assert run(capsys, "solve", CONFIG, "--omega", "1", "--set", "nope=1")[0] == 2
    assert run(capsys, "solve", CONFIG, "--omega", "1", "--set", "b=-1")[0] == 2


def test_strict_regime(capsys):
    code, _, err = run(capsys, "solve", CONFIG, "--omega", "1", "--set", "b=0.5", "--strict")
    assert code == 3
    assert "b*x_bar = 0.5 <= sqrt(C*S(x_bar))" in err
    assert run(capsys, "solve", CONFIG, "--omega", "1", "--set", "b=0.5")[0] == 0


def test_sweep(capsys, tmp_path):
    out_csv = tmp_path / "sweep.csv"
    code, out, err = run(capsys, "sweep", CONFIG, "--grid-n", "101", "--out", out_csv)
    assert code == 0 and "argmax omega = 1" in err
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "omega,h,gamma,x1,x2,p1,p2,q1,q2,operator_value,sensor_value,regime_ok,ir_ok"
    assert len(lines) == 102
    values = [float(l.split(",")[9]) for l in lines[1:]]
    assert values[-1] == max(values)
    manifest = json.loads(Path(str(out_csv) + ".manifest.json").read_text())
    assert manifest["command"] == "sweep" and manifest["outputs"] == [str(out_csv)]
    assert manifest["config_path"] == str(CONFIG) and "wall_clock_s" in manifest


def test_sweep_single_point(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    assert run(capsys, "sweep", CONFIG, "--grid-n", "1", "--out", out_csv)[0] == 0
    rows = out_csv.read_text().splitlines()[1:]
    assert len(rows) == 1 and rows[0].startswith("1,")


def test_sweep_unwritable(capsys, tmp_path):
    assert run(capsys, "sweep", CONFIG, "--out", tmp_path / "no" / "such" / "dir.csv")[0] == 4


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", CONFIG, "--omega", "0.5", "--tol", "1e-9")
    assert code == 0 and json.loads(out)["certified"] is True


def test_verify_corrupted(capsys):
    code, out, err = run(capsys, "verify", CONFIG, "--omega", "0.5", "--override", "p2=0.8")
    assert code == 1
    assert "sensor stage 2: NT" in err
    assert json.loads(out)["overrides"] == {"p2": 0.8}
    assert run(capsys, "verify", CONFIG, "--omega", "0.5", "--override", "h=3")[0] == 2


def test_simulate(capsys, tmp_path):
    out_csv = tmp_path / "traj.csv"
    args = ("simulate", CONFIG, "--omega", "0.5", "--episodes", "100000", "--seed", "42", "--out", out_csv,
            "--log-episodes", "1000")
    code, out, err = run(capsys, *args)
    assert code == 0
    rep = json.loads(out)
    assert rep["sensor"]["within_3se"] == "PASS" and rep["operator"]["within_3se"] == "PASS"
    assert "PASS" in err
    first = out_csv.read_bytes()
    assert first.count(b"\n") == 2001
    assert run(capsys, *args)[0] == 0
    assert out_csv.read_bytes() == first
    manifest = json.loads(Path(str(out_csv) + ".manifest.json").read_text())
    assert manifest["seed"] == 42


def test_simulate_small_and_invalid(capsys):
    code, out, _ = run(capsys, "simulate", CONFIG, "--omega", "0.5", "--episodes", "10", "--seed", "1")
    assert code == 0 and json.loads(out)["sensor"]["se"] > 0
    assert run(capsys, "simulate", CONFIG, "--omega", "0.5", "--episodes", "0")[0] == 2


def test_json_output_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    assert run(capsys, "solve", CONFIG, "--omega", "0.5", "--json", path)[0] == 0
    assert json.loads(path.read_text())["h"] == 4
    assert Path(str(path) + ".manifest.json").exists()


def test_manifest_rerun_reproduces(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    run(capsys, "sweep", CONFIG, "--grid-n", "11", "--out", out_csv, "--set", "C=0.3")
    first = out_csv.read_bytes()
    manifest = json.loads(Path(str(out_csv) + ".manifest.json").read_text())
    assert manifest["overrides"] == {"C": 0.3}
    out_csv.unlink()
    assert main(manifest["argv"]) == 0
    assert out_csv.read_bytes() == first


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "sensorcontract", "solve", str(CONFIG), "--omega", "1"],
                         capture_output=True, text=True, env=dict(os.environ))
    assert res.returncode == 0 and json.loads(res.stdout)["h"] == 2
