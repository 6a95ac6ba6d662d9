"""
Command line entry point.

    vinedesign optimize --task task1 --algo ga --param N=200 --seed 3 --out best.json
    vinedesign sweep --tasks tasks/ --grid default --runs 50 --out sweep/
    vinedesign stats --sweep sweep/ --alpha 0.05

Exit status is 0 on success, 1 for invalid input (files, parameters,
arguments) and 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from vinedesign.engines import ALGORITHMS, EngineConfig, parse_params, run_engine
from vinedesign.engines.config import default_grid
from vinedesign.errors import DegenerateInput, InvalidConfig, ParseError, ValidationError
from vinedesign.evaluation import OBJECTIVE_KEYS
from vinedesign.files import bundled_tasks, export_scene, load_task, record_from_result, save_solution

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
INPUT_ERRORS = (ParseError, ValidationError, InvalidConfig, DegenerateInput)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _task_sources(specs) -> dict:
    """Task id -> path/name from a mix of directories, files and bundled names."""
    out = {}
    for spec in specs:
        p = Path(spec)
        if p.is_dir():
            files = sorted(p.glob("*.json"))
            if not files:
                raise ParseError("directory contains no task files", path=p)
            for f in files:
                out[f.stem] = f
        else:
            out[p.stem if p.suffix == ".json" else spec] = spec
    return out


def cmd_optimize(args) -> int:
    task = load_task(args.task)
    params = parse_params(args.param)
    if args.seed is not None:
        params["seed"] = args.seed
    config = EngineConfig(args.algo, **params)

    def report(g, best):
        if args.verbose and (g % max(1, config.G // 10) == 0 or g == config.G):
            print(f"# gen {g}: f_ik={best.f_ik:.4f} violations={best.violations}", file=sys.stderr)

    start = time.perf_counter()
    result = run_engine(task, config, callback=report)
    seconds = time.perf_counter() - start
    record = record_from_result(result, task, task.name, args.algo, seconds=seconds)
    save_solution(record, args.out)
    if args.scene:
        export_scene(record, task, args.scene)
    if args.figure or args.history_figure:
        from vinedesign import plotting

        if args.figure:
            plotting.plot_scene(record, task, args.figure, title=f"{task.name} {args.algo} seed {config.seed}")
        if args.history_figure:
            plotting.plot_history(record.history, args.history_figure)

    w = csv.writer(sys.stdout)
    w.writerow(("task", "algorithm", "seed", *OBJECTIVE_KEYS, "violations", "feasible", "seconds"))
    f = record.fitness
    w.writerow((task.name, args.algo, config.seed, *(f"{v:.6g}" for v in f.as_array()), f.violations, int(f.feasible), f"{seconds:.2f}"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from vinedesign.sweep import load_grid, run_sweep

    tasks = {tid: load_task(src) for tid, src in _task_sources(args.tasks).items()}
    combos = load_grid(args.grid)
    overrides = parse_params(args.param)
    if overrides:
        combos = [(c, cfg.with_params(**overrides)) for c, cfg in combos]
    total = len(tasks) * len(combos) * args.runs
    done = [0]

    def progress(record):
        done[0] += 1
        if args.verbose:
            state = "failed" if record.error else f"f_ik={record.fitness.f_ik:.3f}"
            print(f"# [{done[0]}/{total}] {record.task_id} {record.combo_id} {state}", file=sys.stderr)

    result = run_sweep(tasks, combos, args.runs, args.master_seed, args.jobs, args.out, progress=progress)
    w = csv.writer(sys.stdout)
    w.writerow(("task", "combo", "best_rank", "median_rank", "feasible_runs", "failed_runs"))
    for tid, ts in result.tasks.items():
        for ci, combo_id in enumerate(ts.combo_ids):
            recs = ts.records[ci]
            ranks = sorted(ts.ranks[ci])
            median = ranks[len(ranks) // 2] if len(ranks) % 2 else (ranks[len(ranks) // 2 - 1] + ranks[len(ranks) // 2]) / 2
            w.writerow((tid, combo_id, ranks[0], median, sum(r.feasible for r in recs), sum(r.error is not None for r in recs)))
    return EXIT_OK


def cmd_stats(args) -> int:
    from vinedesign import plotting
    from vinedesign.stats import friedman_test, write_friedman
    from vinedesign.sweep import read_ranks

    root = Path(args.sweep)
    manifest = root / "sweep.json"
    if not manifest.exists():
        raise ParseError("not a sweep directory (sweep.json missing)", path=root)
    task_ids = json.loads(manifest.read_text())["tasks"]
    out = Path(args.out) if args.out else root / "stats"
    rows = []
    for tid in task_ids:
        labels, ranks = read_ranks(root / tid / "ranks.csv")
        result = friedman_test(ranks.T, args.alpha)
        summary = write_friedman(result, labels, out / tid)
        if not args.no_figures:
            plotting.plot_rank_boxes(labels, ranks, out / tid / "ranks_boxplot.png", title=tid)
            plotting.plot_average_ranks(
                labels, result.average_ranks, result.critical_difference, out / tid / "average_ranks.png", title=tid
            )
        rows.append({"task": tid, **summary})

    fields = ("task", "k", "blocks", "chi2_F", "p_value", "alpha", "critical_difference", "significant_pairs", "pairs")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        for stream in (fh, sys.stdout):
            w = csv.DictWriter(stream, fieldnames=fields, extrasaction="ignore")
            w.writeheader()
            w.writerows(rows)
    return EXIT_OK


def cmd_grid(args) -> int:
    from vinedesign.sweep import grid_to_dict

    text = json.dumps(grid_to_dict(default_grid()), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_scene(args) -> int:
    from vinedesign.files import load_solution

    task = load_task(args.task)
    record = load_solution(args.solution)
    if len(record.steering) != task.n_targets or len(record.design) != task.n:
        raise ValidationError("solution does not match the task's targets or chain length")
    if args.out:
        export_scene(record, task, args.out)
    if args.figure:
        from vinedesign import plotting

        plotting.plot_scene(record, task, args.figure, title=task.name)
    return EXIT_OK


def cmd_tasks(args) -> int:
    for name in bundled_tasks():
        t = load_task(name)
        print(f"{name},{t.n_targets},{len(t.obstacles)},{t.dimension}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = Parser(prog="vinedesign", description="Design optimization for soft growing robot manipulators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    o = sub.add_parser("optimize", help="run one engine on one task")
    o.add_argument("--task", required=True, help="task file or bundled task name")
    o.add_argument("--algo", required=True, choices=ALGORITHMS)
    o.add_argument("--param", action="append", default=[], metavar="K=V", help="engine parameter override")
    o.add_argument("--seed", type=int)
    o.add_argument("--out", required=True, help="solution JSON path")
    o.add_argument("--scene", help="also write scene CSV blocks here")
    o.add_argument("--figure", help="also render the scene to this image")
    o.add_argument("--history-figure", help="render best-so-far objectives per generation")
    o.add_argument("-v", "--verbose", action="store_true")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("sweep", help="seeded runs over a parameter grid")
    s.add_argument("--tasks", required=True, nargs="+", help="task directory, files or bundled names")
    s.add_argument("--grid", default="default", help="grid JSON file, or 'default' for the 58 combinations")
    s.add_argument("--runs", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--master-seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    s.add_argument("--param", action="append", default=[], metavar="K=V", help="override for every combination")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_sweep)

    st = sub.add_parser("stats", help="Friedman + Bonferroni-Dunn over a sweep")
    st.add_argument("--sweep", required=True)
    st.add_argument("--alpha", type=float, default=0.05)
    st.add_argument("--out", help="output directory (default <sweep>/stats)")
    st.add_argument("--no-figures", action="store_true")
    st.set_defaults(func=cmd_stats)

    g = sub.add_parser("grid", help="write the default 58-combination grid as JSON")
    g.add_argument("--out")
    g.set_defaults(func=cmd_grid)

    sc = sub.add_parser("scene", help="export scene CSV / figure for a saved solution")
    sc.add_argument("--task", required=True)
    sc.add_argument("--solution", required=True)
    sc.add_argument("--out")
    sc.add_argument("--figure")
    sc.set_defaults(func=cmd_scene)

    t = sub.add_parser("tasks", help="list bundled tasks")
    t.set_defaults(func=cmd_tasks)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
