"""Command-line front end.

Subcommands: generate random grid instances, schedule them with the
dispatch heuristics, solve exactly, export the MIP as an LP file, convert
unit job-shop instances, validate schedules, and run benchmark sweeps.

Exit codes: 0 success, 1 domain or file error, 2 usage error, 4 schedule
has hard-deadline violations, 5 schedule has slot-window failures, 6
instance infeasible, 7 time limit hit with an incumbent, 8 time limit hit
with no incumbent.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import ALGORITHMS, SweepResult, emit_csv, run_sweep
from .core import INF, VspError, evaluate, validate_schedule
from .exact import SolveStatus, solve_exact
from .heuristics import Mode, VehicleStatus, deadline_and_proximity, run_dispatch
from .instances import (
    DEFAULT_RATIOS,
    ExperimentConfig,
    GridSpec,
    generate_grid_instance,
    read_instance,
    read_jsp,
    read_schedule,
    reduce_jsp_to_vsp,
    write_instance,
    write_schedule,
)
from .mip import export_mip

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HARD_DEADLINE = 4
EXIT_SLOT_WINDOW = 5
EXIT_INFEASIBLE = 6
EXIT_BUDGET_INCUMBENT = 7
EXIT_BUDGET_EMPTY = 8

_MODES = {
    "proximity": Mode.PROXIMITY,
    "abs": Mode.ABS_DEADLINE_PROXIMITY,
    "rel": Mode.REL_DEADLINE_PROXIMITY,
}


def _parse_grid(text: str) -> GridSpec:
    try:
        rows, cols = text.lower().split("x")
        return GridSpec(int(rows), int(cols))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 5x5: {text!r}") from exc


def _parse_ratios(text: str) -> tuple[float, ...]:
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(
                f"ratio range must look like 1.0:2.0:0.1: {text!r}"
            ) from exc
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad ratio range: {text!r}")
        count = int((stop - start) / step + 1e-9) + 1
        return tuple(round(start + k * step, 10) for k in range(count))
    return tuple(float(x) for x in text.split(","))


def _parse_vehicle_counts(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _parse_tau_max(text: str) -> int | float:
    if text.lower() in ("inf", "none"):
        return INF
    return int(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsp", description="Vehicle scheduling toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="create one random grid instance")
    gen.add_argument("--grid", type=_parse_grid, default=GridSpec(5, 5))
    gen.add_argument("--vehicles", type=int, required=True)
    gen.add_argument("--ratio", type=float, required=True,
                     help="soft deadline as a multiple of the free trip time")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--separation", type=int, default=5)
    gen.add_argument("--tau-min", type=int, default=50)
    gen.add_argument("--tau-max", type=_parse_tau_max, default=INF)
    gen.add_argument("--hard-factor", type=float, default=2.2)
    gen.add_argument("--out", required=True)

    sched = sub.add_parser("schedule", help="run a dispatch heuristic")
    sched.add_argument("--instance", required=True)
    sched.add_argument("--mode", choices=[*_MODES, "best"], required=True)
    sched.add_argument("--negative-slack", choices=["prose", "pseudocode"],
                       default="prose")
    sched.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve exactly by branch and bound")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--exact", action="store_true", required=True)
    solve.add_argument("--time-limit", type=float, default=None)
    solve.add_argument("--horizon", type=int, default=None,
                       help="optional upper bound on every stamp")
    solve.add_argument("--out", required=True)

    export = sub.add_parser("export-mip", help="write the model as an LP file")
    export.add_argument("--instance", required=True)
    export.add_argument("--horizon", type=int, default=None)
    export.add_argument("--out", required=True)

    reduce = sub.add_parser("reduce-jsp", help="convert a unit job shop")
    reduce.add_argument("--jsp", required=True)
    reduce.add_argument("--out", required=True)

    check = sub.add_parser("validate", help="check a schedule against an instance")
    check.add_argument("--instance", required=True)
    check.add_argument("--schedule", required=True)

    bench = sub.add_parser("bench", help="run a deadline-ratio sweep")
    bench.add_argument("--grid", type=_parse_grid, default=GridSpec(5, 5))
    bench.add_argument("--vehicles", type=_parse_vehicle_counts, required=True)
    bench.add_argument("--instances", type=int, default=20)
    bench.add_argument("--ratios", type=_parse_ratios, default=None)
    bench.add_argument("--algorithms", default="baseline,heuristic")
    bench.add_argument("--seed", type=int, default=42)
    bench.add_argument("--separation", type=int, default=5)
    bench.add_argument("--tau-min", type=int, default=50)
    bench.add_argument("--hard-factor", type=float, default=2.2)
    bench.add_argument("--exact-cap", type=int, default=25)
    bench.add_argument("--exact-time-limit", type=float, default=3600.0)
    bench.add_argument("--negative-slack", choices=["prose", "pseudocode"],
                       default="prose")
    bench.add_argument("--out-dir", required=True)
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        n_vehicles=args.vehicles,
        grid=args.grid,
        separation=args.separation,
        tau_min_link=args.tau_min,
        tau_max_link=args.tau_max,
        hard_deadline_factor=max(args.hard_factor, args.ratio),
        soft_deadline_ratios=(args.ratio,),
        n_instances=1,
        seed=args.seed,
    )
    instance = generate_grid_instance(config, args.ratio, args.seed)
    write_instance(instance, args.out)
    print(f"wrote {args.out}: {instance.n_vehicles} vehicles, "
          f"{instance.total_stamps} stamps")
    return EXIT_OK


def _cmd_schedule(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    if args.mode == "best":
        result = deadline_and_proximity(instance, args.negative_slack)
    else:
        result = run_dispatch(instance, _MODES[args.mode], args.negative_slack)
    counts = {status: 0 for status in VehicleStatus}
    for status in result.statuses:
        counts[status] += 1
    for status, count in counts.items():
        if count:
            print(f"{status.value}: {count}")
    if not result.complete:
        print("no complete schedule; nothing written", file=sys.stderr)
        return EXIT_SLOT_WINDOW
    schedule = result.schedule()
    write_schedule(schedule, args.out)
    print(f"mode={result.mode.value} "
          f"tardy={evaluate(instance, schedule):g} -> {args.out}")
    if result.hard_violations:
        return EXIT_HARD_DEADLINE
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    result = solve_exact(instance, time_limit=args.time_limit, horizon=args.horizon)
    print(f"status={result.status.value} nodes={result.node_count}")
    if result.schedule is not None:
        write_schedule(result.schedule, args.out)
        print(f"objective={result.objective:g} -> {args.out}")
    elif result.witness is not None:
        for constraint in result.witness:
            print(f"  cycle: {constraint.label} (>= {constraint.bound})",
                  file=sys.stderr)
    return {
        SolveStatus.OPTIMAL: EXIT_OK,
        SolveStatus.FEASIBLE_INCUMBENT: EXIT_BUDGET_INCUMBENT,
        SolveStatus.INFEASIBLE: EXIT_INFEASIBLE,
        SolveStatus.BUDGET_EXHAUSTED: EXIT_BUDGET_EMPTY,
    }[result.status]


def _cmd_export_mip(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    text = export_mip(instance, horizon=args.horizon)
    Path(args.out).write_text(text)
    print(f"wrote {args.out} ({len(text.splitlines())} lines)")
    return EXIT_OK


def _cmd_reduce_jsp(args: argparse.Namespace) -> int:
    jsp = read_jsp(args.jsp)
    instance = reduce_jsp_to_vsp(jsp)
    write_instance(instance, args.out)
    print(f"wrote {args.out}: {instance.n_vehicles} vehicles on "
          f"{instance.graph.vertex_count} vertices")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    schedule = read_schedule(args.schedule)
    report = validate_schedule(instance, schedule)
    if report:
        print("schedule is feasible")
        return EXIT_OK
    for violation in report.violations:
        print(str(violation))
    return EXIT_ERROR


def _cmd_bench(args: argparse.Namespace) -> int:
    algorithms = tuple(args.algorithms.split(","))
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise VspError(f"unknown algorithms: {sorted(unknown)}")
    ratios = args.ratios if args.ratios else DEFAULT_RATIOS
    parts = []
    for n in args.vehicles:
        config = ExperimentConfig(
            n_vehicles=n,
            grid=args.grid,
            separation=args.separation,
            tau_min_link=args.tau_min,
            hard_deadline_factor=args.hard_factor,
            soft_deadline_ratios=ratios,
            n_instances=args.instances,
            seed=args.seed,
        )
        parts.append(run_sweep(
            config,
            algorithms,
            exact_time_limit=(
                args.exact_time_limit if "exact" in algorithms else None
            ),
            exact_cap=args.exact_cap,
            negative_slack=args.negative_slack,
        ))
    combined = SweepResult.combined(parts)
    tardy_path, runtime_path = emit_csv(combined, args.out_dir)
    manifest = {
        "grid": f"{args.grid.rows}x{args.grid.cols}",
        "vehicles": list(args.vehicles),
        "instances": args.instances,
        "ratios": list(ratios),
        "algorithms": list(algorithms),
        "seed": args.seed,
        "separation": args.separation,
        "tau_min": args.tau_min,
        "hard_factor": args.hard_factor,
        "exact_cap": args.exact_cap,
        "exact_time_limit": args.exact_time_limit,
        "negative_slack": args.negative_slack,
    }
    manifest_path = Path(args.out_dir) / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {tardy_path}, {runtime_path}, {manifest_path}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "schedule": _cmd_schedule,
    "solve": _cmd_solve,
    "export-mip": _cmd_export_mip,
    "reduce-jsp": _cmd_reduce_jsp,
    "validate": _cmd_validate,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except VspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
