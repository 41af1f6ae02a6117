from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codinggap.gaps.base import base_instance, hub_edge, permutation_paths
from codinggap.instance import Path, UnicastInstance
from codinggap.protocol.aggregate import bucketed_schedule, lp_aggregate, pipeline
from codinggap.protocol.trace import (
    ProtocolTrace,
    ReplayError,
    Span,
    Transmission,
    replay_coding,
    replay_routing,
    routing_as_coding,
    schedule_to_trace,
    session_mask,
)
from codinggap.protocol.xor import xor_star_protocol
from codinggap.routing import Schedule, ScheduledPacket, assignment_from_paths, schedule


def _hand_router(inst: UnicastInstance) -> Schedule:
    """Permutation paths of the base instance, restricted to the sessions present."""
    k = sum(1 for v in inst.nodes if v.startswith("s"))  # s1..sk; the hub is "S"
    wanted = {(s.source, s.sink) for s in inst.sessions}
    paths = [p for p in permutation_paths(k) if (p.source, p.sink) in wanted]
    return schedule(inst, assignment_from_paths(inst, paths))


# GF(2) spans


def test_span_rank_and_membership():
    sp = Span()
    assert sp.add(0b011) and sp.add(0b110)
    assert not sp.add(0b101)
    assert 0b101 in sp and 0b001 not in sp
    assert sp.rank == 2


@given(st.lists(st.integers(0, 255), max_size=12))
def test_span_rank_never_exceeds_vectors(vectors):
    sp = Span()
    for v in vectors:
        sp.add(v)
    assert sp.rank <= min(len(vectors), 8)
    for v in vectors:
        assert v in sp


# XOR protocol and coding replay


@pytest.mark.parametrize("k", [2, 5, 8, 9, 16])
def test_xor_protocol_finishes_in_three(k):
    inst = base_instance(k).instance
    times = replay_coding(inst, xor_star_protocol(k))
    assert times.times == (3,) * k


def test_xor_trace_json_roundtrip():
    trace = xor_star_protocol(5)
    assert ProtocolTrace.from_json(json.loads(json.dumps(trace.to_json()))) == trace


def test_coding_replay_rejects_unknown_information():
    inst = base_instance(3).instance
    # round 1: S forwards a message it has not received
    bad = ProtocolTrace(((Transmission(hub_edge(3), 0, coeffs=1),),))
    with pytest.raises(ReplayError):
        replay_coding(inst, bad)


def test_coding_replay_rejects_overload():
    inst = base_instance(3).instance
    bad = ProtocolTrace(((Transmission(0, 0, coeffs=1), Transmission(0, 0, coeffs=1)),))
    with pytest.raises(ReplayError):
        replay_coding(inst, bad)


def test_coding_replay_reports_undelivered():
    inst = base_instance(3).instance
    with pytest.raises(ReplayError):
        replay_coding(inst, ProtocolTrace(((Transmission(0, 0, coeffs=1),),)))


def test_session_mask_and_offsets():
    inst = UnicastInstance.build([("a", "b")], [("a", "b", 2), ("a", "b", 1)])
    assert session_mask(inst, 0) == 0b011
    assert session_mask(inst, 1) == 0b100


# routing replay


def test_routing_replay_rejects_early_forwarding():
    inst = UnicastInstance.build([("s", "a"), ("a", "t")], [("s", "t")])
    p = Path(("s", "a", "t"), (0, 1))
    bad = Schedule((ScheduledPacket(0, 0, p, (1, 1)),), 1)
    with pytest.raises(ReplayError):
        replay_routing(inst, bad)
    good = Schedule((ScheduledPacket(0, 0, p, (1, 2)),), 2)
    assert replay_routing(inst, good).times == (2,)


def test_routing_trace_json_roundtrip():
    inst = base_instance(5).instance
    sched = _hand_router(inst)
    trace = schedule_to_trace(inst, sched)
    assert trace.is_routing
    back = ProtocolTrace.from_json(json.loads(json.dumps(trace.to_json())))
    assert replay_routing(inst, back) == replay_routing(inst, sched)
    assert replay_coding(inst, routing_as_coding(inst, back)) == replay_routing(inst, sched)


# completion-time objectives


def test_lp_aggregate_examples():
    assert lp_aggregate((3, 3, 3)) == 3
    assert lp_aggregate((1, 2, 3), w=[Fraction(1, 3)] * 3, p=1) == 2
    assert lp_aggregate((3, 4), w=(1, 1), p=2) == 5


def test_lp_aggregate_irrational_root_is_float():
    v = lp_aggregate((1, 1), p=2)
    assert isinstance(v, float) and math.isclose(v, math.sqrt(2))
    with pytest.raises(ValueError):
        lp_aggregate((1,), w=(-1,))
    assert lp_aggregate((5, 1), w=(0, 1)) == 1


@given(st.lists(st.integers(0, 50), min_size=1, max_size=6), st.integers(1, 6))
def test_lp_norm_is_monotone_in_p(times, p):
    assert lp_aggregate(times, p=p + 1) <= lp_aggregate(times, p=p) + 1e-9
    assert lp_aggregate(times) <= lp_aggregate(times, p=p) + 1e-9


def test_bucketed_schedule_on_base_five():
    inst = base_instance(5).instance
    res = bucketed_schedule(inst, (3,) * 5, router=_hand_router)
    assert len(res.classes) == 1
    assert res.times.times == (5,) * 5
    assert res.alpha == Fraction(5, 3)
    assert all(t <= 4 * res.alpha * 3 for t in res.times)


def test_bucketed_schedule_orders_classes():
    inst = UnicastInstance.build([("a", "b"), ("c", "d")], [("a", "b"), ("c", "d")])
    res = bucketed_schedule(inst, (1, 1024))
    assert [c.level for c in res.classes] == [0, 10]
    assert res.times[0] == 1
    assert res.classes[1].offset == res.classes[0].makespan


def test_pipeline_single_edge(single_edge):
    sched = Schedule((ScheduledPacket(0, 0, Path(("s", "t"), (0,)), (1,)),), 1)
    res = pipeline(single_edge, sched, 8)
    assert res.rounds_used == 8
    assert res.rate == 1 and res.target_rate == 1


def test_pipeline_base_five():
    inst = base_instance(5).instance
    sched = _hand_router(inst)
    res = pipeline(inst, sched, 50)
    assert res.rounds_used <= 50 + sched.makespan
    assert res.rate >= Fraction(9, 10) * res.target_rate


def test_pipeline_identity_for_one_copy():
    inst = base_instance(5).instance
    sched = _hand_router(inst)
    res = pipeline(inst, sched, 1)
    assert res.schedule.packets == sched.packets
    assert res.rounds_used == sched.makespan
