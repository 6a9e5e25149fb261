"""Core model for the vehicle scheduling problem.

An instance fixes a directed traffic graph, one walk per vehicle, per-link
travel-time windows, request times, soft and hard deadlines, and pairwise
separation gaps at shared vertices.  A schedule assigns one arrival time
stamp per vehicle per walk vertex.  All times are integer ticks so that
validation and the event-driven schedulers can compare stamps exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

INF = math.inf

# (vehicle, step, vehicle, step) -> required separation
SeparationKey = tuple[int, int, int, int]


class VspError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(VspError):
    """Schedule or instance components do not structurally agree."""


class ConfigurationError(VspError):
    """An operation was requested with an incompatible instance setup."""


def is_tick(value: object) -> bool:
    """True for plain integers (bool excluded)."""
    return isinstance(value, int) and not isinstance(value, bool)


def is_tick_or_inf(value: object) -> bool:
    return is_tick(value) or (isinstance(value, float) and value == INF)


class ObjectiveKind(Enum):
    MAKESPAN = "makespan"
    TOTAL_COMPLETION = "total_completion"
    TOTAL_WEIGHTED_COMPLETION = "total_weighted_completion"
    MAX_LATENESS = "max_lateness"
    TOTAL_TARDINESS = "total_tardiness"
    TARDY_COUNT = "tardy_count"
    WEIGHTED_TARDY_COUNT = "weighted_tardy_count"

    @property
    def weighted(self) -> bool:
        return self in (
            ObjectiveKind.TOTAL_WEIGHTED_COMPLETION,
            ObjectiveKind.WEIGHTED_TARDY_COUNT,
        )


@dataclass(frozen=True)
class TimeScale:
    """Resolution of the integer tick grid (ticks per external time unit)."""

    ticks_per_unit: int = 1

    def __post_init__(self) -> None:
        if not is_tick(self.ticks_per_unit) or self.ticks_per_unit <= 0:
            raise ValueError("ticks_per_unit must be a positive integer")


@dataclass(frozen=True)
class Graph:
    """Directed traffic network; must be weakly connected, no self loops."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if not is_tick(self.vertex_count) or self.vertex_count <= 0:
            raise ValueError("vertex_count must be a positive integer")
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for u, v in self.edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) references an unknown vertex")
            if u == v:
                raise ValueError(f"self-loop edge at vertex {u} is not allowed")
        if not self._weakly_connected():
            raise ValueError("graph must be weakly connected")

    def _weakly_connected(self) -> bool:
        if self.vertex_count == 1:
            return True
        neighbours: dict[int, list[int]] = {v: [] for v in range(self.vertex_count)}
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in neighbours[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.vertex_count

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges


@dataclass(frozen=True)
class Walk:
    """Vertex sequence of one vehicle plus per-link travel-time windows.

    min_times[i] and max_times[i] bound the time spent on the link from
    vertices[i] to vertices[i+1]; max entries may be +inf.
    """

    vertices: tuple[int, ...]
    min_times: tuple[int, ...]
    max_times: tuple[int | float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "min_times", tuple(self.min_times))
        object.__setattr__(self, "max_times", tuple(self.max_times))
        if len(self.vertices) < 1:
            raise ValueError("a walk must visit at least one vertex")
        links = len(self.vertices) - 1
        if len(self.min_times) != links or len(self.max_times) != links:
            raise ValueError(
                f"walk with {len(self.vertices)} vertices needs {links} link times, "
                f"got {len(self.min_times)} min / {len(self.max_times)} max"
            )
        for i, lo in enumerate(self.min_times):
            if not is_tick(lo) or lo < 0:
                raise ValueError(f"min time on link {i} must be a nonnegative integer")
            hi = self.max_times[i]
            if not is_tick_or_inf(hi):
                raise ValueError(f"max time on link {i} must be an integer or +inf")
            if lo > hi:
                raise ValueError(f"link {i}: min time {lo} exceeds max time {hi}")

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Instance:
    """One scheduling problem: graph, walks, time windows, deadlines,
    separation gaps, and the objective to minimise.

    Separations are stored symmetrically: the constructor accepts entries in
    either (or both) orientations and mirrors them.  An entry may only pair
    distinct vehicles at steps that visit the same vertex.
    """

    graph: Graph
    walks: tuple[Walk, ...]
    request_times: tuple[int, ...]
    soft_deadlines: tuple[int | float, ...]
    hard_deadlines: tuple[int | float, ...]
    separations: dict[SeparationKey, int] = field(default_factory=dict)
    objective: ObjectiveKind = ObjectiveKind.TARDY_COUNT
    weights: tuple[float, ...] | None = None
    time_scale: TimeScale = TimeScale(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "walks", tuple(self.walks))
        object.__setattr__(self, "request_times", tuple(self.request_times))
        object.__setattr__(self, "soft_deadlines", tuple(self.soft_deadlines))
        object.__setattr__(self, "hard_deadlines", tuple(self.hard_deadlines))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(self.weights))

        n = len(self.walks)
        if n == 0:
            raise ValueError("an instance needs at least one vehicle")
        for name, seq in (
            ("request_times", self.request_times),
            ("soft_deadlines", self.soft_deadlines),
            ("hard_deadlines", self.hard_deadlines),
        ):
            if len(seq) != n:
                raise ValueError(f"{name} has length {len(seq)}, expected {n}")
        for j, walk in enumerate(self.walks):
            for i in range(len(walk) - 1):
                u, v = walk.vertices[i], walk.vertices[i + 1]
                if not self.graph.has_edge(u, v):
                    raise ValueError(
                        f"walk {j} uses ({u},{v}) at link {i}, not a graph edge"
                    )
        for j in range(n):
            if not is_tick(self.request_times[j]):
                raise ValueError(f"request time of vehicle {j} must be an integer")
            soft, hard = self.soft_deadlines[j], self.hard_deadlines[j]
            if not is_tick_or_inf(soft) or not is_tick_or_inf(hard):
                raise ValueError(f"deadlines of vehicle {j} must be integers or +inf")
            if self.request_times[j] > hard:
                raise ValueError(f"vehicle {j}: request time exceeds hard deadline")
            # soft == +inf means "no soft deadline" and is allowed alongside a
            # finite hard deadline; a finite soft deadline must fit the chain.
            if soft != INF and not (self.request_times[j] <= soft <= hard):
                raise ValueError(
                    f"vehicle {j}: need request <= soft <= hard deadline, got "
                    f"{self.request_times[j]}, {soft}, {hard}"
                )
        if self.weights is not None:
            if len(self.weights) != n:
                raise ValueError(f"weights has length {len(self.weights)}, expected {n}")
            for j, w in enumerate(self.weights):
                if not (w > 0):
                    raise ValueError(f"weight of vehicle {j} must be positive")
        if self.objective.weighted and self.weights is None:
            raise ConfigurationError(
                f"objective {self.objective.value} requires vehicle weights"
            )
        object.__setattr__(self, "separations", self._normalised_separations())

    def _normalised_separations(self) -> dict[SeparationKey, int]:
        table: dict[SeparationKey, int] = {}
        for key, s in self.separations.items():
            j1, i1, j2, i2 = key
            if j1 == j2:
                raise ValueError(f"separation {key} pairs a vehicle with itself")
            for j, i in ((j1, i1), (j2, i2)):
                if not (0 <= j < len(self.walks)) or not (0 <= i < len(self.walks[j])):
                    raise ValueError(f"separation {key} references an unknown step")
            if self.walks[j1].vertices[i1] != self.walks[j2].vertices[i2]:
                raise ValueError(
                    f"separation {key} pairs steps at different vertices"
                )
            if not is_tick(s) or s < 0:
                raise ValueError(f"separation {key} must be a nonnegative integer")
            for k in ((j1, i1, j2, i2), (j2, i2, j1, i1)):
                if table.get(k, s) != s:
                    raise ValueError(f"separation {k} given twice with different values")
                table[k] = s
        return table

    @property
    def n_vehicles(self) -> int:
        return len(self.walks)

    @property
    def total_stamps(self) -> int:
        return sum(len(w) for w in self.walks)

    def canonical_separations(self) -> Iterator[tuple[SeparationKey, int]]:
        """Each separation once, oriented with the lower vehicle id first."""
        for (j1, i1, j2, i2), s in self.separations.items():
            if j1 < j2:
                yield (j1, i1, j2, i2), s


@dataclass(frozen=True)
class Schedule:
    """Per-vehicle arrival stamps, one per walk vertex, in integer ticks."""

    times: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(tuple(row) for row in self.times))
        for j, row in enumerate(self.times):
            for i, t in enumerate(row):
                if not is_tick(t):
                    raise ValueError(f"stamp ({j},{i}) must be an integer tick")

    def completion(self, j: int) -> int:
        return self.times[j][-1]

    def completions(self) -> tuple[int, ...]:
        return tuple(row[-1] for row in self.times)


class ConstraintKind(Enum):
    REQUEST_TIME = "request_time"
    CONTINUITY = "continuity"
    HARD_DEADLINE = "hard_deadline"
    TRAVEL_TIME = "travel_time"
    SEPARATION = "separation"


@dataclass(frozen=True)
class Violation:
    kind: ConstraintKind
    vehicles: tuple[int, ...]
    indices: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        return f"[{self.kind.value}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return not self.violations

    def passes(self, ignore: frozenset[ConstraintKind] = frozenset()) -> bool:
        return all(v.kind in ignore for v in self.violations)

    def by_kind(self, kind: ConstraintKind) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]


def check_shape(instance: Instance, schedule: Schedule) -> None:
    """Raise ShapeError unless the schedule matches the instance's walks."""
    if len(schedule.times) != instance.n_vehicles:
        raise ShapeError(
            f"schedule covers {len(schedule.times)} vehicles, "
            f"instance has {instance.n_vehicles}"
        )
    for j, walk in enumerate(instance.walks):
        if len(schedule.times[j]) != len(walk):
            raise ShapeError(
                f"vehicle {j}: {len(schedule.times[j])} stamps for "
                f"{len(walk)} walk vertices"
            )


def validate_schedule(instance: Instance, schedule: Schedule) -> ValidationReport:
    """Check every constraint and report each violation individually.

    Constraint classes: request time, continuity and hard deadline (the
    per-vehicle chain), per-link travel-time windows, and pairwise
    separation at shared vertices (checked once per unordered pair).
    Comparisons are exact; there is no tolerance.
    """
    check_shape(instance, schedule)
    found: list[Violation] = []
    for j, walk in enumerate(instance.walks):
        row = schedule.times[j]
        if row[0] < instance.request_times[j]:
            found.append(Violation(
                ConstraintKind.REQUEST_TIME, (j,), (0,),
                f"vehicle {j} starts at {row[0]} before request time "
                f"{instance.request_times[j]}",
            ))
        for i in range(len(walk) - 1):
            if row[i + 1] < row[i]:
                found.append(Violation(
                    ConstraintKind.CONTINUITY, (j,), (i, i + 1),
                    f"vehicle {j}: stamp {row[i + 1]} at step {i + 1} precedes "
                    f"stamp {row[i]} at step {i}",
                ))
            gap = row[i + 1] - row[i]
            lo, hi = walk.min_times[i], walk.max_times[i]
            if gap < lo or gap > hi:
                found.append(Violation(
                    ConstraintKind.TRAVEL_TIME, (j,), (i,),
                    f"vehicle {j} link {i}: travel time {gap} outside [{lo},{hi}]",
                ))
        if row[-1] > instance.hard_deadlines[j]:
            found.append(Violation(
                ConstraintKind.HARD_DEADLINE, (j,), (len(walk) - 1,),
                f"vehicle {j} completes at {row[-1]} after hard deadline "
                f"{instance.hard_deadlines[j]}",
            ))
    for (j1, i1, j2, i2), s in instance.canonical_separations():
        gap = abs(schedule.times[j1][i1] - schedule.times[j2][i2])
        if gap < s:
            found.append(Violation(
                ConstraintKind.SEPARATION, (j1, j2), (i1, i2),
                f"vehicles {j1} (step {i1}) and {j2} (step {i2}) are {gap} apart "
                f"at vertex {instance.walks[j1].vertices[i1]}, need {s}",
            ))
    return ValidationReport(tuple(found))


def min_free_trip_time(instance: Instance, j: int) -> int:
    """Completion-minus-start duration of vehicle j ignoring all others."""
    if not (0 <= j < instance.n_vehicles):
        raise ValueError(f"unknown vehicle id {j}")
    return sum(instance.walks[j].min_times)


def tardy_flags(instance: Instance, schedule: Schedule) -> tuple[bool, ...]:
    """Per-vehicle tardiness indicators; exactly on-time is not tardy."""
    check_shape(instance, schedule)
    return tuple(
        schedule.completion(j) > instance.soft_deadlines[j]
        for j in range(instance.n_vehicles)
    )


def evaluate(
    instance: Instance,
    schedule: Schedule,
    kind: ObjectiveKind | None = None,
) -> float:
    """Value of an objective on a structurally valid schedule.

    Completion is the last stamp of each vehicle; lateness is completion
    minus the soft deadline, tardiness its positive part, and a vehicle is
    tardy only on strict exceedance.
    """
    check_shape(instance, schedule)
    if kind is None:
        kind = instance.objective
    if kind.weighted and instance.weights is None:
        raise ConfigurationError(f"objective {kind.value} requires vehicle weights")

    completions = schedule.completions()
    if kind is ObjectiveKind.MAKESPAN:
        return max(completions)
    if kind is ObjectiveKind.TOTAL_COMPLETION:
        return sum(completions)
    if kind is ObjectiveKind.TOTAL_WEIGHTED_COMPLETION:
        return sum(w * c for w, c in zip(instance.weights, completions))
    lateness = [c - d for c, d in zip(completions, instance.soft_deadlines)]
    if kind is ObjectiveKind.MAX_LATENESS:
        return max(lateness)
    if kind is ObjectiveKind.TOTAL_TARDINESS:
        return sum(max(0, late) for late in lateness)
    tardy = tardy_flags(instance, schedule)
    if kind is ObjectiveKind.TARDY_COUNT:
        return sum(tardy)
    if kind is ObjectiveKind.WEIGHTED_TARDY_COUNT:
        return sum(w for w, u in zip(instance.weights, tardy) if u)
    raise ConfigurationError(f"unsupported objective kind {kind!r}")
