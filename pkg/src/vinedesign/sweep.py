"""
Parameter sweeps: many seeded runs per (task, combination), pooled ranking.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vinedesign.engines import run_engine
from vinedesign.engines.config import EngineConfig, default_grid
from vinedesign.errors import InvalidConfig, ParseError
from vinedesign.evaluation import OBJECTIVE_KEYS
from vinedesign.files import (
    RunRecord,
    failed_record,
    record_from_result,
    save_solution,
    task_to_dict,
)
from vinedesign.ranking import DEFAULT_SCHEME, RankingScheme, rank_partition
from vinedesign.robot import Task

RANKS_HEADER = ("combo", "run", "seed", "rank", "feasible", *OBJECTIVE_KEYS, "violations", "seconds", "error")


def derive_seed(master_seed: int, combo_id: str, run: int) -> int:
    """Stable 63-bit seed for one run; independent of execution order and Python's hash salt."""
    digest = hashlib.sha256(f"{int(master_seed)}:{combo_id}:{int(run)}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class TaskSweep:
    """Records of one task, ``records[c][r]`` for combination ``c`` and run ``r``."""

    task_id: str
    combo_ids: list
    records: list
    ranks: np.ndarray

    def record(self, combo_id: str, run: int) -> RunRecord:
        return self.records[self.combo_ids.index(combo_id)][run]


@dataclass
class SweepResult:
    tasks: dict = field(default_factory=dict)
    master_seed: int = 0
    runs: int = 1

    def __getitem__(self, task_id) -> TaskSweep:
        return self.tasks[task_id]


def pooled_ranks(records, scheme: RankingScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Global 1-based ranks of a flat list of records.

    Successful runs are ranked by Rank Partitioning in list order; failed runs
    (no fitness) follow them in list order, so the result stays a permutation.
    """
    ok = [i for i, r in enumerate(records) if r.fitness is not None]
    failed = [i for i, r in enumerate(records) if r.fitness is None]
    ranks = np.zeros(len(records), dtype=np.int64)
    if ok:
        ranks[ok] = rank_partition([records[i].fitness for i in ok], scheme)
    ranks[failed] = np.arange(len(ok) + 1, len(records) + 1)
    return ranks


def execute_run(task: Task, task_id: str, combo_id: str, config: EngineConfig) -> RunRecord:
    """One optimization run; exceptions become a failed record instead of propagating."""
    start = time.perf_counter()
    try:
        result = run_engine(task, config)
    except Exception as exc:  # a failed run must not sink the sweep
        msg = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return failed_record(task_id, combo_id, config, msg)
    return record_from_result(result, task, task_id, combo_id, seconds=time.perf_counter() - start)


def _job(args):
    return args[:3], execute_run(*args[3:])


def run_sweep(
    tasks: dict,
    combos,
    runs: int,
    master_seed: int = 0,
    parallelism: int = 1,
    out_dir=None,
    scheme: RankingScheme = DEFAULT_SCHEME,
    progress=None,
) -> SweepResult:
    """Run every (task, combination, run) triple and pool the bests per task.

    ``tasks`` maps task ids to Task objects; ``combos`` is a list of
    ``(combo_id, EngineConfig)``. Each run's seed comes from
    :func:`derive_seed`, so results do not depend on ``parallelism``.
    When ``out_dir`` is given every record is written to
    ``out_dir/<task>/<combo>/run_XXX.json`` plus one ``ranks.csv`` per task.
    """
    if runs < 1:
        raise InvalidConfig(f"runs per combination must be >= 1, got {runs}")
    combos = list(combos)
    ids = [c for c, _ in combos]
    if len(set(ids)) != len(ids):
        raise InvalidConfig("combination ids must be unique")

    jobs = []
    for task_id, task in tasks.items():
        for ci, (combo_id, config) in enumerate(combos):
            for r in range(runs):
                cfg = config.with_params(seed=derive_seed(master_seed, combo_id, r))
                jobs.append((task_id, ci, r, task, task_id, combo_id, cfg))

    grid = {t: [[None] * runs for _ in combos] for t in tasks}
    out = Path(out_dir) if out_dir is not None else None

    def store(key, record):
        task_id, ci, r = key
        grid[task_id][ci][r] = record
        if out is not None:
            save_solution(record, out / task_id / ids[ci] / f"run_{r:03d}.json")
        if progress is not None:
            progress(record)

    if parallelism <= 1:
        for job in jobs:
            store(*_job(job))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for key, record in pool.map(_job, jobs, chunksize=1):
                store(key, record)

    result = SweepResult(master_seed=int(master_seed), runs=runs)
    for task_id in tasks:
        flat = [rec for row in grid[task_id] for rec in row]
        ranks = pooled_ranks(flat, scheme).reshape(len(combos), runs)
        result.tasks[task_id] = TaskSweep(task_id, ids, grid[task_id], ranks)
        if out is not None:
            write_task_sweep(result.tasks[task_id], tasks[task_id], out / task_id)
    if out is not None:
        manifest = {
            "master_seed": int(master_seed),
            "runs": runs,
            "tasks": list(tasks),
            "combinations": [{"id": c, **cfg.to_dict()} for c, cfg in combos],
        }
        (out / "sweep.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return result


def write_task_sweep(ts: TaskSweep, task: Task, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "task.json").write_text(json.dumps(task_to_dict(task), indent=1) + "\n")
    with open(directory / "ranks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RANKS_HEADER)
        for ci, combo_id in enumerate(ts.combo_ids):
            for r, rec in enumerate(ts.records[ci]):
                f = rec.fitness
                values = [repr(v) for v in f.as_array()] + [f.violations] if f else [""] * 6
                seconds = "" if rec.seconds is None else f"{rec.seconds:.3f}"
                w.writerow([combo_id, r, rec.seed, int(ts.ranks[ci, r]), int(rec.feasible), *values, seconds, rec.error or ""])


def read_ranks(path) -> tuple[list, np.ndarray]:
    """Combination ids and the (combos, runs) global rank matrix of a ranks.csv."""
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(row["combo"], {})[int(row["run"])] = int(row["rank"])
    if not rows:
        raise ParseError("no rows", path=path)
    ids = list(rows)
    runs = sorted(rows[ids[0]])
    if any(sorted(rows[c]) != runs for c in ids):
        raise ParseError("combinations have different run counts", path=path)
    return ids, np.array([[rows[c][r] for r in runs] for c in ids])


def load_grid(spec) -> list[tuple[str, EngineConfig]]:
    """``"default"`` for the 58 standard combinations, or a JSON grid file.

    A grid file is ``{"shared": {...}, "combinations": [{"id": ..., "algorithm": ..., ...}]}``;
    ``shared`` settings (e.g. N, G) apply to every combination unless overridden.
    """
    if str(spec) == "default":
        return default_grid()
    path = Path(spec)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read grid file: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno) from exc
    if isinstance(data, list):
        data = {"combinations": data}
    shared = data.get("shared", {})
    if shared.get("grid") == "default":
        rest = {k: v for k, v in shared.items() if k != "grid"}
        return default_grid(**rest)
    combos = []
    for i, entry in enumerate(data.get("combinations", [])):
        entry = dict(entry)
        if "id" not in entry:
            raise ParseError("missing required field", path=path, field=f"combinations[{i}].id")
        combo_id = str(entry.pop("id"))
        combos.append((combo_id, EngineConfig.from_dict({**shared, **entry})))
    if not combos:
        raise ParseError("grid has no combinations", path=path, field="combinations")
    return combos


def grid_to_dict(combos, shared: dict | None = None) -> dict:
    shared = dict(shared or {})
    return {
        "shared": shared,
        "combinations": [
            {"id": c, **{k: v for k, v in cfg.to_dict().items() if k not in shared and k != "seed"}}
            for c, cfg in combos
        ],
    }
