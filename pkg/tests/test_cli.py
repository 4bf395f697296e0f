import csv
import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from orchsim import cli
from orchsim.scenario import parse_scenario

SCENARIOS = resources.files("orchsim").joinpath("scenarios")


def scenario_path(name: str) -> Path:
    return Path(str(SCENARIOS.joinpath(name)))


def read_plan(out: Path) -> list[dict]:
    with open(out / "plan.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def read_summary(out: Path) -> dict:
    return dict(line.split("=", 1) for line in (out / "summary.txt").read_text().splitlines())


def test_run_fig2b(tmp_path):
    rc = cli.main(["run", "--scenario", str(scenario_path("fig2b.json")), "--objective", "energy", "--seed", "42", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_plan(tmp_path)
    assert rows == [
        {
            "task_id": "analytics",
            "node_id": "edge",
            "slice": "EMBB",
            "start": "0.0",
            "finish": "2.01",
            "energy_j": "10.0",
            "cost_units": "10.0",
            "deadline_met": "true",
            "rejected": "false",
        }
    ]
    assert read_summary(tmp_path)["total_task_energy_j"] == "10.0"
    raw = (tmp_path / "plan.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"task_id,node_id,slice,start,finish,energy_j,cost_units,deadline_met,rejected\n")


def test_unparsable(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "SchemaError" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert cli.main(["run", "--scenario", str(tmp_path / "nope.json")]) == 1


def test_bad_flag_is_input_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--scenario", "x.json", "--objective", "speed"])
    assert exc.value.code == 1


def test_oracle_csv(tmp_path):
    rc = cli.main(["run", "--scenario", str(scenario_path("fig2a.json")), "--objective", "cost", "--oracle", "--out", str(tmp_path)])
    assert rc == 0
    with open(tmp_path / "oracle.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["task_id"], r["oracle_start"], r["oracle_value"], r["match"]) for r in rows] == [
        ("batch-report", "100.0", "10.0", "true")
    ]


def test_validate_only(tmp_path, capsys):
    rc = cli.main(["run", "--scenario", str(scenario_path("fig2a.json")), "--validate", "--out", str(tmp_path / "o")])
    assert rc == 0
    assert not (tmp_path / "o").exists()
    assert "ok" in capsys.readouterr().out


def test_strict_exit_code(tmp_path, monkeypatch):
    real_run = cli.run

    def missing_run(*args, **kwargs):
        rep = real_run(*args, **kwargs)
        rep.deadline_miss_count = 1
        return rep

    monkeypatch.setattr(cli, "run", missing_run)
    args = ["run", "--scenario", str(scenario_path("fig2b.json")), "--out", str(tmp_path)]
    assert cli.main(args) == 0
    assert cli.main(args + ["--strict"]) == 2


def test_batch(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for name in ("fig2a.json", "fig2b.json"):
        (src / name).write_text(scenario_path(name).read_text())
    assert cli.main(["run", "--batch", str(src), "--out", str(tmp_path / "out"), "--jobs", "2"]) == 0
    assert read_plan(tmp_path / "out" / "fig2b")[0]["node_id"] == "edge"
    assert read_plan(tmp_path / "out" / "fig2a")[0]["start"] == "0.0"


def test_generate_then_run(tmp_path, capsys):
    assert cli.main(["generate", "--tasks", "30", "--nodes", "4", "--seed", "3"]) == 0
    text = capsys.readouterr().out
    sc = parse_scenario(text)
    assert len(sc.tasks) == 30 and len(sc.nodes) == 4
    path = tmp_path / "g.json"
    path.write_text(text)
    assert cli.main(["run", "--scenario", str(path), "--objective", "cost", "--oracle", "--out", str(tmp_path / "o")]) == 0
    summary = read_summary(tmp_path / "o")
    assert summary["oracle_decisions"] == summary["oracle_matches"] == "30"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "orchsim", "run", "--scenario", str(scenario_path("fig2b.json")), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        env={"ORCHSIM_LOG": "debug", "PATH": ""},
    )
    assert proc.returncode == 0, proc.stderr
    assert "commit analytics -> edge" in proc.stderr
