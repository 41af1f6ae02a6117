from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codinggap.flow.exact import solve_exact
from codinggap.generators import random_instance
from codinggap.gaps.base import base_instance, permutation_paths
from codinggap.instance import InstanceError, Path, UnicastInstance
from codinggap.protocol.trace import replay_coding, replay_routing, routing_as_coding, schedule_to_trace
from codinggap.routing import (
    ACCEPT_FACTOR,
    BETA_BOUND,
    GREEDY_FACTOR,
    RouteError,
    Schedule,
    ScheduledPacket,
    assignment_from_paths,
    doubling_horizons,
    round_paths,
    route,
    schedule,
    simulate_delays,
)


def test_doubling_horizons():
    assert doubling_horizons(1) == [1]
    assert doubling_horizons(6) == [1, 2, 4, 6]
    assert doubling_horizons(8) == [1, 2, 4, 8]


@pytest.mark.parametrize("k", [5, 8, 16])
def test_permutation_paths_schedule_at_five(k):
    inst = base_instance(k).instance
    assignment = assignment_from_paths(inst, permutation_paths(k))
    assert assignment.check(inst, T=5) == []
    assert assignment.dilation == 5
    sched = schedule(inst, assignment)
    assert sched.makespan == 5
    assert sched.check(inst) == []
    assert replay_routing(inst, sched).makespan == 5


def test_single_edge_routes_in_one_round(single_edge):
    res = route(single_edge, 4)
    assert res.makespan == 1
    assert replay_routing(single_edge, res.schedule).times == (1,)


@pytest.mark.parametrize("k", [5, 8])
def test_generic_route_on_base_instances(k):
    inst = base_instance(k).instance
    res = route(inst, 16, seed=0)
    assert res.schedule.check(inst) == []
    assert replay_routing(inst, res.schedule).makespan == res.makespan
    assert res.makespan >= 5  # routing can never beat the F-deleted distance bound here
    assert res.makespan <= BETA_BOUND * (res.assignment.congestion + res.assignment.dilation)


def test_rounding_congestion_bound():
    inst = base_instance(5).instance
    sol = solve_exact(inst, 4)
    a = round_paths(inst, sol, seed=2)
    limit = (GREEDY_FACTOR if a.greedy_fallback else ACCEPT_FACTOR) * sol.T / sol.z
    assert a.congestion <= limit
    assert a.check(inst, T=4) == []


def test_route_fails_when_horizon_too_short():
    inst = base_instance(5).instance
    with pytest.raises(RouteError):
        route(inst, 2)


def test_assignment_rejects_foreign_paths():
    inst = base_instance(5).instance
    with pytest.raises(InstanceError):
        assignment_from_paths(inst, [inst.path_from_nodes(["s1", "S", "T", "t2"])] * 2)


def test_schedule_check_catches_capacity_violation():
    inst = UnicastInstance.build([("s", "t")], [("s", "t", 2)])
    p = Path(("s", "t"), (0,))
    bad = Schedule((ScheduledPacket(0, 0, p, (1,)), ScheduledPacket(0, 1, p, (1,))), 1)
    assert any("carries 2" in msg for msg in bad.check(inst))
    good = simulate_delays(inst, assignment_from_paths(inst, [p, p]).packets, [0, 0])
    assert good.makespan == 2 and good.check(inst) == []


def test_schedule_json_roundtrip():
    inst = base_instance(5).instance
    sched = schedule(inst, assignment_from_paths(inst, permutation_paths(5)))
    back = Schedule.from_json(json.loads(json.dumps(sched.to_json())), inst)
    assert back == sched


def test_route_is_deterministic():
    inst = random_instance(4)
    a, b = route(inst, 8, seed=9), route(inst, 8, seed=9)
    assert a.schedule.to_json() == b.schedule.to_json()


@given(st.integers(0, 100_000))
def test_routing_replay_matches_coding_replay(seed):
    inst = random_instance(seed)
    res = route(inst, 32, seed=seed)
    assert res.schedule.check(inst) == []
    routed = replay_routing(inst, res.schedule)
    coded = replay_coding(inst, routing_as_coding(inst, schedule_to_trace(inst, res.schedule)))
    assert routed.times == coded.times == res.schedule.completion_times(inst.k)
    assert res.beta == Fraction(res.makespan) / (res.assignment.congestion + res.assignment.dilation)
