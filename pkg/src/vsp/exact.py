"""Exact minimisation of the (weighted) tardy-vehicle count.

Every pair of stamps tied by a positive separation gap must cross in one of
two orders.  Fixing an order for every pair leaves a pure difference system
whose componentwise-minimal solution is computable by longest paths from an
origin; a branch-and-bound over the order choices with that relaxation as
the bounding function yields the exact optimum, because tardiness flags only
ever grow when completion times grow.
"""

from __future__ import annotations

import sys
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .core import (
    INF,
    ConfigurationError,
    Instance,
    ObjectiveKind,
    Schedule,
    VspError,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ConflictPair:
    """One shared-vertex stamp pair with its required separation.

    The pair is stored once, lower vehicle id first.  Deciding it
    "j1 first" constrains t[j2][i2] - t[j1][i1] >= s; "j2 first" is the
    mirrored constraint.
    """

    j1: int
    i1: int
    j2: int
    i2: int
    s: int


def conflict_pairs(instance: Instance) -> tuple[ConflictPair, ...]:
    """All separation pairs with a positive gap, in canonical order.

    Zero-gap entries constrain nothing and are dropped here.
    """
    pairs = [
        ConflictPair(j1, i1, j2, i2, s)
        for (j1, i1, j2, i2), s in instance.canonical_separations()
        if s > 0
    ]
    pairs.sort(key=lambda p: (p.j1, p.i1, p.j2, p.i2))
    return tuple(pairs)


@dataclass(frozen=True)
class Constraint:
    """t[x] - t[y] >= bound, over system variable ids."""

    x: int
    y: int
    bound: int
    label: str


class DifferenceConstraintSystem:
    """Lower/upper stamp bounds as a single difference system.

    Variable 0 is an origin fixed at zero; variable ids for stamps follow in
    walk order.  The base constraints encode request times, hard deadlines,
    and per-link travel windows; crossing orders for conflict pairs are
    added on top via add_order.
    """

    def __init__(self, instance: Instance, horizon: int | float | None = None):
        self.instance = instance
        self._offsets: list[int] = []
        next_id = 1
        for walk in instance.walks:
            self._offsets.append(next_id)
            next_id += len(walk)
        self.n_vars = next_id
        self.constraints: list[Constraint] = []
        for j, walk in enumerate(instance.walks):
            first = self.var(j, 0)
            last = self.var(j, len(walk) - 1)
            self.add(first, 0, instance.request_times[j], f"request v{j}")
            if instance.hard_deadlines[j] != INF:
                self.add(0, last, -instance.hard_deadlines[j], f"hard_deadline v{j}")
            for i in range(len(walk) - 1):
                u, v = self.var(j, i), self.var(j, i + 1)
                self.add(v, u, walk.min_times[i], f"min_time v{j} link{i}")
                if walk.max_times[i] != INF:
                    self.add(u, v, -walk.max_times[i], f"max_time v{j} link{i}")
            if horizon is not None and horizon != INF:
                self.add(0, last, -int(horizon), f"horizon v{j}")

    def var(self, j: int, i: int) -> int:
        return self._offsets[j] + i

    def add(self, x: int, y: int, bound: int, label: str) -> None:
        self.constraints.append(Constraint(x, y, int(bound), label))

    def add_order(self, pair: ConflictPair, j1_first: bool) -> None:
        earlier, later = (
            ((pair.j1, pair.i1), (pair.j2, pair.i2))
            if j1_first
            else ((pair.j2, pair.i2), (pair.j1, pair.i1))
        )
        self.add(
            self.var(*later),
            self.var(*earlier),
            pair.s,
            f"separation v{earlier[0]}@{earlier[1]} before v{later[0]}@{later[1]}",
        )

    def to_schedule(self, times: tuple[int, ...]) -> Schedule:
        rows = []
        for j, walk in enumerate(self.instance.walks):
            off = self._offsets[j]
            rows.append(tuple(times[off:off + len(walk)]))
        return Schedule(tuple(rows))


@dataclass(frozen=True)
class DcsSolution:
    feasible: bool
    times: tuple[int, ...] | None
    witness: tuple[Constraint, ...] | None


def minimal_times(dcs: DifferenceConstraintSystem) -> DcsSolution:
    """Componentwise-minimal solution of the system, or a positive cycle.

    Longest path from the origin by Bellman-Ford; the system is infeasible
    exactly when a positive-total cycle of constraints exists, and that
    cycle is returned as a certificate.
    """
    n = dcs.n_vars
    dist: list[float] = [NEG_INF] * n
    dist[0] = 0
    pred: list[Constraint | None] = [None] * n
    cons = dcs.constraints
    for _ in range(n - 1):
        changed = False
        for c in cons:
            dy = dist[c.y]
            if dy != NEG_INF and dist[c.x] < dy + c.bound:
                dist[c.x] = dy + c.bound
                pred[c.x] = c
                changed = True
        if not changed:
            break
    on_cycle = None
    for c in cons:
        dy = dist[c.y]
        if dy != NEG_INF and dist[c.x] < dy + c.bound:
            pred[c.x] = c
            on_cycle = c.x
            break
    if on_cycle is None:
        if any(d == NEG_INF for d in dist):
            raise VspError("system has a variable unreachable from the origin")
        return DcsSolution(True, tuple(int(d) for d in dist), None)
    # Walk predecessors until a vertex repeats; the repeat closes the cycle.
    seen: dict[int, int] = {}
    chain: list[Constraint] = []
    u = on_cycle
    while u not in seen:
        seen[u] = len(chain)
        c = pred[u]
        if c is None:
            raise VspError("predecessor chain broke while extracting a cycle")
        chain.append(c)
        u = c.y
    cycle = chain[seen[u]:]
    cycle.reverse()
    return DcsSolution(False, None, tuple(cycle))


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE_INCUMBENT = "feasible_incumbent"
    INFEASIBLE = "infeasible"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    schedule: Schedule | None
    objective: float | None
    node_count: int
    witness: tuple[Constraint, ...] | None = None


def solve_exact(
    instance: Instance,
    time_limit: float | None = None,
    horizon: int | None = None,
) -> SolveResult:
    """Branch-and-bound over crossing orders for the tardy-count objectives.

    Each search node fixes the order of a subset of conflict pairs and keeps
    the componentwise-minimal stamps of the partial system.  Minimal stamps
    give both feasibility (positive cycle means prune) and a valid lower
    bound, since every completion of the subtree has stamps at least as
    large.  A fully decided feasible node evaluates exactly at its minimal
    stamps.  Branching picks the undecided pair whose earliest involved
    stamp is smallest; the order already satisfied by the current stamps is
    tried first; the first incumbent found at a given value is kept.

    The search is single-threaded and deterministic.  With a time limit the
    best incumbent so far is returned once the budget runs out.
    """
    if instance.objective not in (
        ObjectiveKind.TARDY_COUNT,
        ObjectiveKind.WEIGHTED_TARDY_COUNT,
    ):
        raise ConfigurationError(
            f"exact solver handles tardy-count objectives only, "
            f"not {instance.objective.value}"
        )
    pairs = conflict_pairs(instance)
    dcs = DifferenceConstraintSystem(instance, horizon=horizon)
    root = minimal_times(dcs)
    if not root.feasible:
        return SolveResult(SolveStatus.INFEASIBLE, None, None, 1, root.witness)

    n_vars = dcs.n_vars
    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n_vars)]
    for c in dcs.constraints:
        adjacency[c.y].append((c.x, c.bound))

    weights = instance.weights or (1,) * instance.n_vehicles
    tardy_terms = [
        (dcs.var(j, len(instance.walks[j]) - 1), instance.soft_deadlines[j], weights[j])
        for j in range(instance.n_vehicles)
        if instance.soft_deadlines[j] != INF
    ]

    def bound_of(dist: list[int]) -> float:
        return sum(w for var, d, w in tardy_terms if dist[var] > d)

    # Directed pair edges: (later var, earlier var, gap) per orientation.
    pair_edges = [
        (
            (dcs.var(p.j2, p.i2), dcs.var(p.j1, p.i1), p.s),
            (dcs.var(p.j1, p.i1), dcs.var(p.j2, p.i2), p.s),
        )
        for p in pairs
    ]

    deadline = None if time_limit is None else time.monotonic() + time_limit
    state = {
        "best_obj": None,
        "best_dist": None,
        "nodes": 0,
        "stopped": False,
    }
    extra: list[list[tuple[int, int]]] = [[] for _ in range(n_vars)]

    def propagate(dist: list[int], x: int, y: int, bound: int) -> list[int] | None:
        if dist[x] >= dist[y] + bound:
            return dist
        new = list(dist)
        new[x] = new[y] + bound
        if x == 0 and new[0] > 0:
            return None
        queue = deque([x])
        pushes = [0] * n_vars
        while queue:
            u = queue.popleft()
            du = new[u]
            for v, c in adjacency[u]:
                if new[v] < du + c:
                    new[v] = du + c
                    if v == 0 and new[0] > 0:
                        return None
                    pushes[v] += 1
                    if pushes[v] > n_vars:
                        return None
                    queue.append(v)
            for v, c in extra[u]:
                if new[v] < du + c:
                    new[v] = du + c
                    pushes[v] += 1
                    if pushes[v] > n_vars:
                        return None
                    queue.append(v)
        return new

    def dfs(dist: list[int], undecided: list[int]) -> None:
        state["nodes"] += 1
        if deadline is not None and time.monotonic() > deadline:
            state["stopped"] = True
            return
        value = bound_of(dist)
        best = state["best_obj"]
        if best is not None and value >= best:
            return
        if not undecided:
            state["best_obj"] = value
            state["best_dist"] = list(dist)
            return
        pick = min(
            range(len(undecided)),
            key=lambda k: (
                min(
                    dist[dcs.var(pairs[undecided[k]].j1, pairs[undecided[k]].i1)],
                    dist[dcs.var(pairs[undecided[k]].j2, pairs[undecided[k]].i2)],
                ),
                undecided[k],
            ),
        )
        rest = undecided[:pick] + undecided[pick + 1:]
        idx = undecided[pick]
        p = pairs[idx]
        j1_first_edge, j2_first_edge = pair_edges[idx]
        v1, v2 = dcs.var(p.j1, p.i1), dcs.var(p.j2, p.i2)
        ordered = (
            (j1_first_edge, j2_first_edge)
            if dist[v1] <= dist[v2]
            else (j2_first_edge, j1_first_edge)
        )
        for x, y, gap in ordered:
            extra[y].append((x, gap))
            child = propagate(dist, x, y, gap)
            if child is not None:
                dfs(child, rest)
            extra[y].pop()
            if state["stopped"]:
                return

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 3 * len(pairs) + 200))
    try:
        dfs(list(root.times), list(range(len(pairs))))
    finally:
        sys.setrecursionlimit(old_limit)

    best_obj = state["best_obj"]
    if best_obj is None:
        status = (
            SolveStatus.BUDGET_EXHAUSTED if state["stopped"] else SolveStatus.INFEASIBLE
        )
        return SolveResult(status, None, None, state["nodes"])
    status = (
        SolveStatus.FEASIBLE_INCUMBENT if state["stopped"] else SolveStatus.OPTIMAL
    )
    schedule = dcs.to_schedule(tuple(state["best_dist"]))
    return SolveResult(status, schedule, best_obj, state["nodes"])
