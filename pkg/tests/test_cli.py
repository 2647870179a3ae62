import csv
import json

import pytest

from extlab import cli, sweep


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_writes_csv_and_passes(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run(["sweep", "--model", "halfline", "--extension", "friedrichs",
                           "--eps", "1e-1:1e-3:4", "--probes", "2", "--seed", "1",
                           "--out", str(out)], capsys)
    assert code == 0
    assert "[PASS]" in stdout and "[FAIL]" not in stdout
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["eps", "quantity_id", "value", "bound", "slope_window"]
    assert len(rows) > 1
    assert any(r[1].startswith("gamma1_eps_minus_err") for r in rows[1:])


def test_sweep_json_output(capsys):
    code, stdout, _ = run(["sweep", "--model", "halfline", "--extension", "friedrichs",
                           "--eps", "1e-1:1e-3:4", "--probes", "2", "--json"], capsys)
    assert code == 0
    doc = json.loads(stdout)
    assert doc["schema_version"] == 1
    assert doc["passed"] is True
    assert all({"name", "passed", "detail"} <= set(c) for c in doc["checks"])


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "model": "twohalflines", "extension": "salpha:1",
        "eps": {"start": 1e-1, "stop": 1e-3, "count": 4},
        "probes": 2, "seed": 3,
    }))
    code, stdout, _ = run(["sweep", "--config", str(cfg), "--json"], capsys)
    assert code == 0
    assert json.loads(stdout)["passed"] is True


def test_flags_override_config(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "twohalflines", "probes": 2}))
    seen = {}

    def fake_run(config):
        seen["model"] = config.model
        return sweep.Report(command="sweep")

    monkeypatch.setattr(sweep, "run_sweep", fake_run)
    code, _, _ = run(["sweep", "--config", str(cfg), "--model", "halfline"], capsys)
    assert code == 0
    assert seen["model"] == "halfline"


def test_configuration_errors_exit_2(tmp_path, capsys):
    assert run(["sweep", "--eps", "bogus"], capsys)[0] == 2
    assert run(["sweep", "--extension", "robin:1"], capsys)[0] == 2
    assert run(["sweep", "--eps", "1e-1:1e-7:4"], capsys)[0] == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"modle": "halfline"}))
    assert run(["sweep", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("{not json")
    assert run(["sweep", "--config", str(cfg)], capsys)[0] == 2
    assert run(["sweep", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_check_failure_exits_3(capsys, monkeypatch):
    report = sweep.Report(command="selftest")
    report.add("synthetic", False, "forced failure")
    monkeypatch.setattr(sweep, "run_selftest", lambda: report)
    code, stdout, _ = run(["selftest"], capsys)
    assert code == 3
    assert "[FAIL] synthetic" in stdout


def test_example2_subset_of_alphas(capsys):
    code, stdout, _ = run(["example2", "--alpha", "0,1"], capsys)
    assert code == 0
    assert "alpha=0" in stdout and "alpha=1" in stdout and "alpha=3" not in stdout


def test_example1_passes(capsys):
    code, stdout, _ = run(["example1"], capsys)
    assert code == 0
    assert "[FAIL]" not in stdout
