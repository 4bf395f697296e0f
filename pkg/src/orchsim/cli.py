"""Command-line entry point: validate and simulate scenarios, export CSV metrics.

    orchsim run --scenario fig2b.json --objective energy --seed 42 --out out/
    orchsim run --batch scenarios/ --out out/
    orchsim generate --tasks 1000 --nodes 12 --seed 7 > big.json

Exit codes: 0 success, 1 input or runtime error, 2 deadline miss under --strict.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from orchsim.errors import OrchSimError
from orchsim.generate import random_scenario
from orchsim.scenario import dump_scenario, load_scenario
from orchsim.scheduling import Objective
from orchsim.simengine import SimulationReport, run
from orchsim.slicing import SliceClass

log = logging.getLogger("orchsim")

PLAN_COLUMNS = ["task_id", "node_id", "slice", "start", "finish", "energy_j", "cost_units", "deadline_met", "rejected"]
ORACLE_COLUMNS = [
    "task_id",
    "time",
    "objective",
    "plan_node_id",
    "plan_start",
    "plan_value",
    "oracle_node_id",
    "oracle_start",
    "oracle_value",
    "evaluated_count",
    "match",
]

EXIT_OK, EXIT_ERROR, EXIT_QOS = 0, 1, 2


def fmt(value) -> str:
    """Stable cell rendering: shortest round-trip floats, lowercase booleans, blank for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def format_plan_csv(report: SimulationReport) -> str:
    return _csv(
        PLAN_COLUMNS,
        (
            (r.task_id, r.node_id, r.slice_class.value, r.start, r.finish, r.energy_j, r.cost_units, r.deadline_met, r.rejected)
            for r in report.records
        ),
    )


def format_oracle_csv(report: SimulationReport) -> str:
    rows = []
    for o in report.oracle_records:
        p = o.plan
        rows.append(
            (
                o.task_id,
                o.time,
                report.objective.value,
                p.node_id if p else None,
                p.start if p else None,
                p.value(report.objective) if p else None,
                o.oracle.best_node_id,
                o.oracle.best_start,
                o.oracle.best_value,
                o.oracle.evaluated_count,
                o.match,
            )
        )
    return _csv(ORACLE_COLUMNS, rows)


def format_summary(report: SimulationReport) -> str:
    n = len(report.records)
    lines = [
        ("objective", report.objective.value),
        ("seed", report.seed),
        ("task_count", n),
        ("accepted_count", n - report.rejection_count),
        ("rejection_count", report.rejection_count),
        ("deadline_miss_count", report.deadline_miss_count),
        ("total_task_energy_j", report.total_task_energy_j),
        ("total_predicted_task_energy_j", report.total_predicted_task_energy_j),
        ("total_idle_energy_j", report.total_idle_energy_j),
        ("total_cost_units", report.total_cost_units),
    ]
    lines += [(f"utilization.{k}", v) for k, v in report.utilization.items()]
    lines += [(f"peak_bw.{c.value}", report.peak_bandwidth[c]) for c in SliceClass]
    if report.oracle_records:
        matched = sum(o.match for o in report.oracle_records)
        lines += [("oracle_decisions", len(report.oracle_records)), ("oracle_matches", matched)]
    return "".join(f"{k}={fmt(v)}\n" for k, v in lines)


def write_artifacts(report: SimulationReport, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = {"plan.csv": format_plan_csv(report), "summary.txt": format_summary(report)}
    if report.oracle_records:
        files["oracle.csv"] = format_oracle_csv(report)
    written = []
    for name, text in files.items():
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written


def _run_one(scenario_path: Path, objective: Objective, seed: int, out: Path, oracle: bool) -> SimulationReport:
    scenario = load_scenario(scenario_path)
    report = run(scenario, seed, objective, oracle=oracle)
    write_artifacts(report, out)
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orchsim", description="Energy-aware nanoservice orchestration simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a scenario and write plan.csv / summary.txt")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", type=Path, help="scenario JSON file")
    src.add_argument("--batch", type=Path, metavar="DIR", help="run every *.json in DIR, one output dir each")
    r.add_argument("--objective", choices=[o.value for o in Objective], default="energy")
    r.add_argument("--seed", type=int, default=0, help="seed for power-observation noise (default 0)")
    r.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    r.add_argument("--oracle", action="store_true", help="also solve each decision exhaustively; writes oracle.csv")
    r.add_argument("--strict", action="store_true", help="exit 2 if any accepted task misses its deadline")
    r.add_argument("--validate", action="store_true", help="parse and validate only")
    r.add_argument("--jobs", type=int, default=None, help="worker processes for --batch")

    g = sub.add_parser("generate", help="write a random scenario to stdout")
    g.add_argument("--tasks", type=int, default=100)
    g.add_argument("--nodes", type=int, default=6)
    g.add_argument("--slots", type=int, default=8)
    g.add_argument("--duration", type=float, default=3600.0)
    g.add_argument("--noise", type=float, default=0.0, help="observation noise fraction")
    g.add_argument("--seed", type=int, default=0)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("ORCHSIM_LOG", "warn").upper()
    level = {"WARN": "WARNING"}.get(level, level)
    if level not in ("ERROR", "WARNING", "INFO", "DEBUG"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run_command(args: argparse.Namespace) -> int:
    objective = Objective(args.objective)
    if args.scenario is not None:
        jobs = [(args.scenario, args.out)]
    else:
        if not args.batch.is_dir():
            raise OrchSimError(f"--batch {args.batch} is not a directory")
        jobs = [(p, args.out / p.stem) for p in sorted(args.batch.glob("*.json"))]

    if args.validate:
        for path, _ in jobs:
            load_scenario(path)
            print(f"{path}: ok")
        return EXIT_OK

    if len(jobs) == 1:
        reports = [_run_one(jobs[0][0], objective, args.seed, jobs[0][1], args.oracle)]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, p, objective, args.seed, out, args.oracle) for p, out in jobs]
            reports = [f.result() for f in futures]

    status = EXIT_OK
    for (path, out), report in zip(jobs, reports):
        log.info("%s -> %s", path, out)
        if args.oracle and not all(o.match for o in report.oracle_records):
            print(f"{path}: orchestrator disagrees with oracle", file=sys.stderr)
            status = EXIT_ERROR
        if args.strict and report.deadline_miss_count and status == EXIT_OK:
            print(f"{path}: {report.deadline_miss_count} deadline miss(es)", file=sys.stderr)
            status = EXIT_QOS
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            sc = random_scenario(
                args.seed, args.tasks, args.nodes, args.slots, duration=args.duration, observation_noise=args.noise
            )
            sys.stdout.write(dump_scenario(sc))
            return EXIT_OK
        return run_command(args)
    except OrchSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
