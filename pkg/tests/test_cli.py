import csv
import io
import json
import subprocess
import sys

import pytest

from vinedesign.cli import main
from vinedesign.files import bundled_task_path, load_solution, read_scene


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_optimize_outputs(tmp_path, capsys):
    out = tmp_path / "best.json"
    code, stdout, _ = run(
        [
            "optimize", "--task", "trivial", "--algo", "ga", "--param", "N=20", "--param", "G=5",
            "--seed", "3", "--out", str(out), "--scene", str(tmp_path / "s.csv"),
            "--figure", str(tmp_path / "s.png"), "--history-figure", str(tmp_path / "h.png"),
        ],
        capsys,
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(stdout)))
    assert rows[0]["task"] == "trivial" and rows[0]["seed"] == "3"
    rec = load_solution(out)
    assert rec.seed == 3 and rec.config.N == 20
    assert len(read_scene(tmp_path / "s.csv")["config"]) == 1
    assert (tmp_path / "s.png").stat().st_size > 0 and (tmp_path / "h.png").stat().st_size > 0


def test_optimize_byte_identical(tmp_path, capsys):
    args = ["optimize", "--task", "task1", "--algo", "pso", "--param", "N=16", "--param", "G=4", "--seed", "9"]
    assert run(args + ["--out", str(tmp_path / "a.json")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b.json")], capsys)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["optimize", "--task", "missing.json", "--algo", "ga", "--out", "x.json"],
        ["optimize", "--task", "trivial", "--algo", "ga", "--param", "N=1", "--out", "x.json"],
        ["optimize", "--task", "trivial", "--algo", "ga", "--param", "nope=1", "--out", "x.json"],
        ["optimize", "--task", "trivial", "--algo", "sa", "--out", "x.json"],
        ["stats", "--sweep", "."],
        ["frobnicate"],
    ],
)
def test_invalid_input_exit_1(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv, capsys)[0] == 1


def test_runtime_failure_exit_2(tmp_path, capsys):
    (tmp_path / "file").write_text("")
    code, _, err = run(
        ["optimize", "--task", "trivial", "--algo", "ga", "--param", "N=4", "--param", "G=1",
         "--out", str(tmp_path / "file" / "x.json")],
        capsys,
    )
    assert code == 2 and "file" in err


def test_sweep_and_stats(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "shared": {"N": 10, "G": 2},
        "combinations": [{"id": "GA-x", "algorithm": "ga"}, {"id": "DE-x", "algorithm": "de"}, {"id": "BB-x", "algorithm": "bbbc"}],
    }))
    tasks = tmp_path / "tasks"
    tasks.mkdir()
    (tasks / "easy.json").write_text(bundled_task_path("trivial").read_text())
    sweep = tmp_path / "sweep"
    code, stdout, _ = run(["sweep", "--tasks", str(tasks), "--grid", str(grid), "--runs", "3", "--out", str(sweep), "--jobs", "2"], capsys)
    assert code == 0
    assert len(list(csv.DictReader(io.StringIO(stdout)))) == 3
    assert len(list((sweep / "easy").glob("*/run_*.json"))) == 9

    code, stdout, _ = run(["stats", "--sweep", str(sweep), "--alpha", "0.05"], capsys)
    assert code == 0
    (row,) = csv.DictReader(io.StringIO(stdout))
    assert row["task"] == "easy" and int(row["k"]) == 3 and int(row["blocks"]) == 3
    for name in ("average_ranks.csv", "pairwise.csv", "ranks_boxplot.png", "average_ranks.png"):
        assert (sweep / "stats" / "easy" / name).exists()


def test_grid_and_tasks(tmp_path, capsys):
    assert run(["grid", "--out", str(tmp_path / "g.json")], capsys)[0] == 0
    assert len(json.loads((tmp_path / "g.json").read_text())["combinations"]) == 58
    code, out, _ = run(["tasks"], capsys)
    assert code == 0 and "task1,2,3,100" in out


def test_scene_command(tmp_path, capsys):
    sol = tmp_path / "s.json"
    run(["optimize", "--task", "task1", "--algo", "ga", "--param", "N=10", "--param", "G=1", "--out", str(sol)], capsys)
    assert run(["scene", "--task", "task1", "--solution", str(sol), "--out", str(tmp_path / "s.csv")], capsys)[0] == 0
    assert run(["scene", "--task", "trivial", "--solution", str(sol), "--out", str(tmp_path / "t.csv")], capsys)[0] == 1


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "vinedesign.cli", "tasks"], capture_output=True, text=True)
    assert res.returncode == 0 and "trivial" in res.stdout
