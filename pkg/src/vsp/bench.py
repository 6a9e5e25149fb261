"""Deadline-ratio sweeps over random grid instances.

For every instance seed and every soft-deadline ratio the harness generates
the instance, runs the requested algorithms, validates each emitted
schedule, and records tardy counts and wall-clock scheduling time.  Means
are aggregated per (vehicle count, ratio, algorithm) cell; runtimes are
first maxed over the ratios of one instance and then averaged across
instances.
"""

from __future__ import annotations

import csv
import math
import random
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .core import (
    ConfigurationError,
    ConstraintKind,
    Instance,
    ObjectiveKind,
    VspError,
    evaluate,
    validate_schedule,
)
from .exact import solve_exact
from .heuristics import Mode, deadline_and_proximity, run_dispatch
from .instances import ExperimentConfig, generate_grid_instance

ALGORITHMS = ("baseline", "heuristic", "exact")

# Hard-deadline breaches by the dispatch heuristics are reported in run
# statuses, not repaired, so they are data rather than validator failures.
_DISPATCH_OK = frozenset({ConstraintKind.HARD_DEADLINE})


@dataclass(frozen=True)
class RunRecord:
    n_vehicles: int
    instance_index: int
    instance_seed: int
    ratio: float
    algorithm: str
    tardy_count: int | None
    tardy_fraction: float | None
    runtime_s: float
    status: str


@dataclass
class SweepResult:
    """Raw per-run records plus the aggregations the CSV files report."""

    n_instances: int
    records: list[RunRecord]

    def cells(self) -> dict[tuple[int, float, str], list[RunRecord]]:
        grouped: dict[tuple[int, float, str], list[RunRecord]] = {}
        for rec in self.records:
            grouped.setdefault(
                (rec.n_vehicles, rec.ratio, rec.algorithm), []
            ).append(rec)
        return grouped

    def mean_tardy(self) -> dict[tuple[int, float, str], tuple[float, float]]:
        """(n, ratio, algorithm) -> (mean tardy fraction, standard error)."""
        out: dict[tuple[int, float, str], tuple[float, float]] = {}
        for key, recs in self.cells().items():
            fractions = [r.tardy_fraction for r in recs if r.tardy_fraction is not None]
            if not fractions:
                continue
            if key[2] != "exact" and len(fractions) != self.n_instances:
                raise VspError(
                    f"cell {key} has {len(fractions)} values, "
                    f"expected {self.n_instances}"
                )
            mean = sum(fractions) / len(fractions)
            err = (
                statistics.stdev(fractions) / math.sqrt(len(fractions))
                if len(fractions) > 1
                else 0.0
            )
            out[key] = (mean, err)
        return out

    def mean_worst_runtime(self) -> dict[tuple[int, str], float]:
        """(n, algorithm) -> mean over instances of the worst per-ratio time."""
        worst: dict[tuple[int, str, int], float] = {}
        for rec in self.records:
            key = (rec.n_vehicles, rec.algorithm, rec.instance_index)
            worst[key] = max(worst.get(key, 0.0), rec.runtime_s)
        grouped: dict[tuple[int, str], list[float]] = {}
        for (n, algorithm, _), value in worst.items():
            grouped.setdefault((n, algorithm), []).append(value)
        return {key: sum(vals) / len(vals) for key, vals in grouped.items()}

    @classmethod
    def combined(cls, parts: list["SweepResult"]) -> "SweepResult":
        if not parts:
            raise ValueError("nothing to combine")
        counts = {p.n_instances for p in parts}
        if len(counts) != 1:
            raise ValueError("cannot combine sweeps with different instance counts")
        merged: list[RunRecord] = []
        for p in parts:
            merged.extend(p.records)
        return cls(parts[0].n_instances, merged)


def _check(instance: Instance, schedule, algorithm: str,
           allowed: frozenset[ConstraintKind]) -> None:
    report = validate_schedule(instance, schedule)
    if not report.passes(ignore=allowed):
        bad = [str(v) for v in report.violations if v.kind not in allowed]
        raise VspError(
            f"{algorithm} produced an invalid schedule: " + "; ".join(bad)
        )


def run_sweep(
    config: ExperimentConfig,
    algorithms: tuple[str, ...] = ("baseline", "heuristic"),
    exact_time_limit: float | None = None,
    exact_cap: int = 25,
    negative_slack: str = "prose",
) -> SweepResult:
    """Run the configured sweep for one vehicle count.

    Every emitted schedule is validated; a violation is a bug and aborts
    the sweep.  The exact solver only runs when the vehicle count is within
    exact_cap and always needs a time limit; runs that hit the limit are
    recorded under their solver status so they can be excluded from
    optimality claims.
    """
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ConfigurationError(f"unknown algorithms: {sorted(unknown)}")
    if "exact" in algorithms and exact_time_limit is None:
        raise ConfigurationError("the exact solver requires a time limit")

    seed_rng = random.Random(config.seed)
    instance_seeds = [seed_rng.randrange(2**32) for _ in range(config.n_instances)]
    records: list[RunRecord] = []
    n = config.n_vehicles
    for index, instance_seed in enumerate(instance_seeds):
        for ratio in config.soft_deadline_ratios:
            instance = generate_grid_instance(config, ratio, instance_seed)

            def record(algorithm: str, tardy: int | None, runtime: float,
                       status: str) -> None:
                records.append(RunRecord(
                    n_vehicles=n,
                    instance_index=index,
                    instance_seed=instance_seed,
                    ratio=ratio,
                    algorithm=algorithm,
                    tardy_count=tardy,
                    tardy_fraction=None if tardy is None else tardy / n,
                    runtime_s=runtime,
                    status=status,
                ))

            if "baseline" in algorithms:
                start = time.perf_counter()
                result = run_dispatch(instance, Mode.PROXIMITY, negative_slack)
                elapsed = time.perf_counter() - start
                schedule = result.schedule()
                _check(instance, schedule, "baseline", _DISPATCH_OK)
                record(
                    "baseline",
                    int(evaluate(instance, schedule, ObjectiveKind.TARDY_COUNT)),
                    elapsed,
                    "completed" if result.hard_violations == 0
                    else f"hard_violations={result.hard_violations}",
                )
            if "heuristic" in algorithms:
                start = time.perf_counter()
                result = deadline_and_proximity(instance, negative_slack)
                elapsed = time.perf_counter() - start
                schedule = result.schedule()
                _check(instance, schedule, "heuristic", _DISPATCH_OK)
                record(
                    "heuristic",
                    int(evaluate(instance, schedule, ObjectiveKind.TARDY_COUNT)),
                    elapsed,
                    "completed" if result.hard_violations == 0
                    else f"hard_violations={result.hard_violations}",
                )
            if "exact" in algorithms and n <= exact_cap:
                start = time.perf_counter()
                result = solve_exact(instance, time_limit=exact_time_limit)
                elapsed = time.perf_counter() - start
                tardy = None
                if result.schedule is not None:
                    _check(instance, result.schedule, "exact", frozenset())
                    tardy = int(result.objective)
                record("exact", tardy, elapsed, result.status.value)
    return SweepResult(config.n_instances, records)


def emit_csv(result: SweepResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write tardy.csv and runtime.csv under out_dir and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tardy_path = out / "tardy.csv"
    runtime_path = out / "runtime.csv"

    order = {name: k for k, name in enumerate(ALGORITHMS)}
    with tardy_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "ratio", "algorithm", "mean_tardy_fraction", "stderr"])
        means = result.mean_tardy()
        for (n, ratio, algorithm) in sorted(
            means, key=lambda key: (key[0], key[1], order[key[2]])
        ):
            mean, err = means[(n, ratio, algorithm)]
            writer.writerow(
                [n, f"{ratio:.3f}", algorithm, f"{mean:.6f}", f"{err:.6f}"]
            )
    with runtime_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "algorithm", "mean_worst_runtime_s"])
        runtimes = result.mean_worst_runtime()
        for (n, algorithm) in sorted(
            runtimes, key=lambda key: (key[0], order[key[1]])
        ):
            writer.writerow([n, algorithm, f"{runtimes[(n, algorithm)]:.6f}"])
    return tardy_path, runtime_path
