import random

import pytest

from vsp import (
    INF,
    ConfigurationError,
    ConstraintKind,
    Graph,
    Instance,
    ObjectiveKind,
    Schedule,
    ShapeError,
    TimeScale,
    Walk,
    evaluate,
    min_free_trip_time,
    tardy_flags,
    validate_schedule,
)
from oracles import chain_instance, merge_instance


# --- model invariants ----------------------------------------------------

def test_graph_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        Graph(2, frozenset({(0, 0), (0, 1)}))


def test_graph_rejects_disconnected():
    with pytest.raises(ValueError, match="connected"):
        Graph(4, frozenset({(0, 1), (2, 3)}))


def test_graph_rejects_unknown_vertex():
    with pytest.raises(ValueError, match="unknown vertex"):
        Graph(2, frozenset({(0, 5)}))


def test_single_vertex_graph_and_walk():
    g = Graph(1, frozenset())
    inst = Instance(
        graph=g,
        walks=(Walk((0,), (), ()),),
        request_times=(0,),
        soft_deadlines=(INF,),
        hard_deadlines=(INF,),
    )
    assert min_free_trip_time(inst, 0) == 0


def test_walk_link_length_mismatch():
    with pytest.raises(ValueError, match="link times"):
        Walk((0, 1, 2), (50,), (INF, INF))


def test_walk_min_exceeds_max():
    with pytest.raises(ValueError, match="exceeds max"):
        Walk((0, 1), (50,), (40,))


def test_walk_must_follow_edges():
    g = Graph(3, frozenset({(0, 1), (1, 2)}))
    with pytest.raises(ValueError, match="not a graph edge"):
        Instance(
            graph=g,
            walks=(Walk((0, 2), (50,), (INF,)),),
            request_times=(0,),
            soft_deadlines=(INF,),
            hard_deadlines=(INF,),
        )


def test_separation_needs_shared_vertex():
    with pytest.raises(ValueError, match="different vertices"):
        merge_instance().__class__(
            graph=Graph(3, frozenset({(0, 2), (1, 2)})),
            walks=(Walk((0, 2), (50,), (INF,)), Walk((1, 2), (50,), (INF,))),
            request_times=(0, 0),
            soft_deadlines=(INF, INF),
            hard_deadlines=(INF, INF),
            separations={(0, 0, 1, 0): 5},  # vertices 0 and 1 differ
        )


def test_separation_rejects_same_vehicle():
    inst = chain_instance()
    with pytest.raises(ValueError, match="itself"):
        Instance(
            graph=inst.graph,
            walks=inst.walks,
            request_times=inst.request_times,
            soft_deadlines=inst.soft_deadlines,
            hard_deadlines=inst.hard_deadlines,
            separations={(0, 0, 0, 1): 5},
        )


def test_separations_mirrored_automatically():
    inst = merge_instance()
    assert inst.separations[(0, 1, 1, 1)] == 5
    assert inst.separations[(1, 1, 0, 1)] == 5
    assert list(inst.canonical_separations()) == [((0, 1, 1, 1), 5)]


def test_deadline_chain_enforced():
    with pytest.raises(ValueError, match="request <= soft <= hard"):
        chain_instance(d_soft=50, d_hard=40)
    with pytest.raises(ValueError, match="request time exceeds"):
        Instance(
            graph=Graph(2, frozenset({(0, 1)})),
            walks=(Walk((0, 1), (50,), (INF,)),),
            request_times=(100,),
            soft_deadlines=(INF,),
            hard_deadlines=(60,),
        )


def test_no_soft_deadline_with_finite_hard_is_fine():
    inst = chain_instance(d_soft=INF, d_hard=500)
    assert inst.soft_deadlines == (INF,)


def test_weighted_objective_requires_weights():
    with pytest.raises(ConfigurationError):
        merge_instance(objective=ObjectiveKind.WEIGHTED_TARDY_COUNT)


def test_time_scale_positive():
    with pytest.raises(ValueError):
        TimeScale(0)


def test_stamps_must_be_integers():
    with pytest.raises(ValueError, match="integer tick"):
        Schedule(((0, 50.5),))


# --- validation ------------------------------------------------------------

def test_tight_chaining_is_clean():
    inst = chain_instance()
    report = validate_schedule(inst, Schedule(((0, 50, 100),)))
    assert report and not report.violations


def test_short_link_flagged():
    inst = chain_instance()
    report = validate_schedule(inst, Schedule(((0, 40, 100),)))
    kinds = [v.kind for v in report.violations]
    assert kinds == [ConstraintKind.TRAVEL_TIME]
    assert report.violations[0].indices == (0,)


def test_separation_reported_once_per_pair():
    inst = merge_instance()
    report = validate_schedule(inst, Schedule(((0, 50), (3, 53))))
    seps = report.by_kind(ConstraintKind.SEPARATION)
    assert len(seps) == 1
    assert abs(50 - 53) == 3 < 5
    assert seps[0].vehicles == (0, 1)


def test_exact_boundary_separation_ok():
    inst = merge_instance()
    report = validate_schedule(inst, Schedule(((0, 50), (5, 55))))
    assert report.passes()


def test_request_continuity_hard_deadline_kinds():
    inst = chain_instance(d_hard=90)
    inst = Instance(
        graph=inst.graph,
        walks=inst.walks,
        request_times=(10,),
        soft_deadlines=(INF,),
        hard_deadlines=(90,),
    )
    report = validate_schedule(inst, Schedule(((0, 60, 55),)))
    kinds = {v.kind for v in report.violations}
    assert ConstraintKind.REQUEST_TIME in kinds
    assert ConstraintKind.CONTINUITY in kinds
    assert ConstraintKind.HARD_DEADLINE not in kinds
    report2 = validate_schedule(inst, Schedule(((10, 60, 110),)))
    assert {v.kind for v in report2.violations} == {ConstraintKind.HARD_DEADLINE}


def test_shape_mismatch_raises():
    inst = chain_instance()
    with pytest.raises(ShapeError):
        validate_schedule(inst, Schedule(((0, 50),)))
    with pytest.raises(ShapeError):
        validate_schedule(inst, Schedule(((0, 50, 100), (0,))))


def test_validation_is_exact_no_tolerance():
    inst = chain_instance()
    assert validate_schedule(inst, Schedule(((0, 49, 100),))).violations
    assert validate_schedule(inst, Schedule(((0, 50, 100),))).passes()


# --- objectives ------------------------------------------------------------

def test_on_time_at_deadline_not_tardy():
    inst = chain_instance(d_soft=100)
    sched = Schedule(((0, 50, 100),))
    assert evaluate(inst, sched, ObjectiveKind.TARDY_COUNT) == 0
    assert evaluate(inst, sched, ObjectiveKind.MAX_LATENESS) == 0
    assert evaluate(inst, sched, ObjectiveKind.TOTAL_TARDINESS) == 0


def test_late_by_ten():
    inst = chain_instance(d_soft=90)
    sched = Schedule(((0, 50, 100),))
    assert evaluate(inst, sched, ObjectiveKind.TARDY_COUNT) == 1
    assert evaluate(inst, sched, ObjectiveKind.TOTAL_TARDINESS) == 10
    assert evaluate(inst, sched, ObjectiveKind.MAX_LATENESS) == 10


def test_weighted_tardy_enumeration():
    # Completions 55 and 50 against a shared deadline of 50: enumerating the
    # indicator per vehicle gives exactly one tardy vehicle, weight 3.
    inst = merge_instance(d_soft=(50, 50), weights=(3, 1))
    sched = Schedule(((0, 55), (0, 50)))
    expected = sum(
        1 for j in range(2) if sched.completion(j) > inst.soft_deadlines[j]
    )
    assert expected == 1
    assert evaluate(inst, sched, ObjectiveKind.TARDY_COUNT) == expected
    assert evaluate(inst, sched, ObjectiveKind.WEIGHTED_TARDY_COUNT) == 3


def test_completion_and_makespan_kinds():
    inst = merge_instance(d_soft=(50, 50), weights=(2, 1))
    sched = Schedule(((0, 55), (0, 50)))
    assert evaluate(inst, sched, ObjectiveKind.MAKESPAN) == 55
    assert evaluate(inst, sched, ObjectiveKind.TOTAL_COMPLETION) == 105
    assert evaluate(inst, sched, ObjectiveKind.TOTAL_WEIGHTED_COMPLETION) == 160


def test_min_free_trip_time():
    assert min_free_trip_time(chain_instance(), 0) == 100
    path5 = chain_instance(n_links=4)
    assert min_free_trip_time(path5, 0) == 200
    with pytest.raises(ValueError):
        min_free_trip_time(path5, 3)


def test_tardy_count_matches_per_vehicle_flags():
    rng = random.Random(4)
    inst = merge_instance(d_soft=(60, 60))
    for _ in range(50):
        sched = Schedule(tuple(
            (0, rng.randint(50, 80)) for _ in range(2)
        ))
        flags = tardy_flags(inst, sched)
        assert evaluate(inst, sched, ObjectiveKind.TARDY_COUNT) == sum(flags)
        max_late = evaluate(inst, sched, ObjectiveKind.MAX_LATENESS)
        if max_late >= 0:
            total = evaluate(inst, sched, ObjectiveKind.TOTAL_TARDINESS)
            assert total >= max_late


def test_objectives_invariant_under_vehicle_relabeling():
    inst = merge_instance(d_soft=(50, 90), weights=(3, 1))
    sched = Schedule(((0, 55), (5, 60)))
    permuted = Instance(
        graph=inst.graph,
        walks=(inst.walks[1], inst.walks[0]),
        request_times=(0, 0),
        soft_deadlines=(90, 50),
        hard_deadlines=(INF, INF),
        separations={(0, 1, 1, 1): 5},
        objective=inst.objective,
        weights=(1, 3),
    )
    permuted_sched = Schedule((sched.times[1], sched.times[0]))
    for kind in ObjectiveKind:
        assert evaluate(inst, sched, kind) == evaluate(permuted, permuted_sched, kind)
