import json

import numpy as np
import pytest
from click.testing import CliRunner

from jetphase.cli import main
from jetphase.config import (DEFAULT_TOLERANCES, load_config, parse_config,
                             resolve_model, resolve_symmetries)
from jetphase.errors import ConfigError

GOOD = {
    "spacetime": {"name": "minkowski"},
    "constants": {"m": 1.0, "q": 0.0, "c": 1.0, "hbar": 1.0},
    "initial_points": [{"x": [0, 0, 0, 0], "v": [0.3, 0, 0]}],
    "x0_range": [0.0, 1.0],
    "integrator": {"method": "rk4-fixed", "step": 0.01},
    "seed": 5,
}


def test_parse_defaults():
    cfg = parse_config({})
    assert cfg.spacetime.name == "minkowski"
    assert cfg.integrator.method == "rk4-fixed"
    assert cfg.tolerance("duality") == DEFAULT_TOLERANCES["duality"]


def test_parse_rejects_bad_fields():
    with pytest.raises(ConfigError) as err:
        parse_config({"spacetime": {"name": "kerr"}})
    assert "spacetime.name" in str(err.value)
    with pytest.raises(ConfigError):
        parse_config({"x0_range": [1.0, 0.0]})
    with pytest.raises(ConfigError):
        parse_config({"tolerances": {"nope": 1e-3}})
    with pytest.raises(ConfigError):
        parse_config({"integrator": {"step": -1}})
    with pytest.raises(ConfigError):
        parse_config({"initial_points": [{"x": [0, 0, 0], "v": [0, 0, 0]}]})
    with pytest.raises(ConfigError):
        parse_config({"symmetries": [{}]})
    with pytest.raises(ConfigError):
        parse_config({"symmetries": [{"name": "e1", "X": {"const": [0, 0, 0, 0]}}]})


def test_resolve_symmetries_names_and_tables():
    cfg = parse_config({
        "symmetries": [
            {"name": "e1"},
            {"X": {"const": [0, 0, 0, 0],
                   "linear": [[0, 0, 0, 0], [0, 0, -1, 0], [0, 1, 0, 0], [0, 0, 0, 0]]},
             "f_breve": {"const": 1.5, "linear": [0, 0, 0, 0]}},
        ]
    })
    cm = resolve_model(cfg)
    syms = resolve_symmetries(cfg, cm)
    assert syms[0].name == "e1"
    x = np.array([0.0, 2.0, 3.0, 1.0])
    assert np.abs(syms[1].X(x) - np.array([0.0, -3.0, 2.0, 0.0])).max() == 0.0
    assert syms[1].f_breve(x) == 1.5
    with pytest.raises(ConfigError):
        resolve_symmetries(parse_config({"symmetries": [{"name": "nope"}]}), cm)


def test_load_config_diagnostics(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"spacetime": {\n  "name": broken\n}}', encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_config(str(bad))
    assert "line 2" in str(err.value)
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def write_config(tmp_path, payload=GOOD):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_cli_integrate_roundtrip(tmp_path):
    runner = CliRunner()
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    res = runner.invoke(main, ["integrate", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0, res.output
    csv = (out / "traj_000.csv").read_text().splitlines()
    assert csv[0].startswith("x0,x1,x2,x3,v1,v2,v3,J_e0")
    assert len(csv) == 102
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trajectories"][0]["termination"] == "range_end"
    assert summary["trajectories"][0]["drift_pass"]


def test_cli_integrate_deterministic(tmp_path):
    runner = CliRunner()
    cfg = write_config(tmp_path)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        res = runner.invoke(main, ["integrate", "--config", str(cfg), "--out", str(out)])
        assert res.exit_code == 0
        outs.append((out / "traj_000.csv").read_bytes())
    assert outs[0] == outs[1]


def test_cli_exit_code_config_error(tmp_path):
    runner = CliRunner()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    res = runner.invoke(main, ["integrate", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2
    assert "line 1" in res.output
    schema_bad = write_config(tmp_path, {**GOOD, "spacetime": {"name": "kerr"}})
    res = runner.invoke(main, ["integrate", "--config", str(schema_bad), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_cli_exit_code_numeric_failure(tmp_path):
    runner = CliRunner()
    # spacelike initial velocity: rejected by phase-point validation at run time
    cfg = write_config(tmp_path, {**GOOD, "initial_points": [{"x": [0, 0, 0, 0], "v": [2.0, 0, 0]}]})
    res = runner.invoke(main, ["integrate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 3


def test_cli_event_recorded_is_success(tmp_path):
    runner = CliRunner()
    payload = {
        "spacetime": {"name": "schwarzschild", "k_s": 1.0},
        "initial_points": [{"x": [0.0, 3.0, 1.5707963, 0.0], "v": [0, 0, 0]}],
        "x0_range": [0.0, 60.0],
        "integrator": {"method": "rkf45-adaptive", "atol": 1e-9, "rtol": 1e-9},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "out"
    res = runner.invoke(main, ["integrate", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trajectories"][0]["termination"] in ("timelike_lost", "range_end")


def test_cli_audit(tmp_path):
    runner = CliRunner()
    cfg = write_config(tmp_path, {"spacetime": {"name": "minkowski"}, "probes": 8})
    out = tmp_path / "report.json"
    res = runner.invoke(main, ["audit", "--config", str(cfg), "--out", str(out),
                               "--tol", "duality=1e-7", "--seed", "11"])
    assert res.exit_code == 0, res.output
    report = json.loads(out.read_text())
    assert report["pass"] is True
    assert report["duality"]["tolerance"] == 1e-7
    assert report["seed"] == 11
    assert "PASS" in res.output


def test_cli_audit_negative_control(tmp_path):
    runner = CliRunner()
    payload = {
        "spacetime": {"name": "minkowski"},
        "probes": 8,
        "symmetries": [
            {"name": "e1"},
            {"X": {"const": [0, 0, 0, 0],
                   "linear": [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}},
        ],
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "report.json"
    res = runner.invoke(main, ["audit", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0
    report = json.loads(out.read_text())
    rows = {row["name"]: row["pass"] for row in report["killing"]["rows"]}
    assert rows["e1"] is True
    assert rows["inline_1"] is False
    assert report["pass"] is False


def test_cli_bad_tol_option(tmp_path):
    runner = CliRunner()
    cfg = write_config(tmp_path)
    res = runner.invoke(main, ["audit", "--config", str(cfg), "--out",
                               str(tmp_path / "r.json"), "--tol", "duality"])
    assert res.exit_code == 2


def test_worker_pool_env(tmp_path, monkeypatch):
    monkeypatch.setenv("JETPHASE_THREADS", "2")
    runner = CliRunner()
    payload = {**GOOD, "initial_points": [
        {"x": [0, 0, 0, 0], "v": [0.3, 0, 0]},
        {"x": [0, 1, 0, 0], "v": [0, 0.3, 0]},
        {"x": [0, 0, 1, 0], "v": [0, 0, 0.3]},
    ]}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "out"
    res = runner.invoke(main, ["integrate", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert sorted(p.name for p in out.glob("traj_*.csv")) == \
        ["traj_000.csv", "traj_001.csv", "traj_002.csv"]
