from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codinggap.generators import random_instance
from codinggap.gaps.base import base_instance
from codinggap.instance import (
    GapInstance,
    InstanceError,
    Path,
    UnicastInstance,
    hop_distance,
    hop_distances_from,
    load_instance,
    num_from_json,
    num_to_json,
    scale_demands,
    subinstance,
    validate,
    weighted_distance,
    weighted_distances_from,
)


def test_build_collects_nodes_in_first_seen_order():
    inst = UnicastInstance.build([("a", "b"), ("b", "c", 3)], [("a", "c", 2)])
    assert inst.nodes == ("a", "b", "c")
    assert inst.edges[1].capacity == 3
    assert inst.sessions[0].demand == 2
    assert inst.total_demand == 2


def test_json_roundtrip(tmp_path):
    inst = random_instance(3)
    path = tmp_path / "x.json"
    path.write_text(json.dumps(inst.to_json()))
    assert load_instance(path) == inst


def test_gap_json_roundtrip(tmp_path):
    gap = base_instance(5)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(gap.to_json()))
    loaded = load_instance(path)
    assert isinstance(loaded, GapInstance)
    assert loaded == gap


@pytest.mark.parametrize(
    "text",
    ["{bad", "[]", '{"nodes": ["a"], "edges": [["a", "b", 1.5]], "sessions": []}', '{"nodes": []}'],
)
def test_malformed_files_raise(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(InstanceError):
        load_instance(path)


def test_validate_reports_problems():
    inst = UnicastInstance(("a", "b", "c"), (), ())
    problems = validate(inst)
    assert problems
    loop = UnicastInstance.build([("a", "a")], [("a", "a")])
    assert any("self-loop" in p for p in validate(loop))


def test_validate_accepts_random_instances():
    for seed in range(20):
        assert validate(random_instance(seed)) == []


def test_parallel_edges_stay_distinct():
    inst = UnicastInstance.build([("a", "b", 1), ("a", "b", 2)], [("a", "b")])
    assert [eid for eid, _ in inst.adjacency["a"]] == [0, 1]
    assert inst.path_from_nodes(["a", "b"]) == Path(("a", "b"), (0,))


def test_path_shape_is_checked():
    with pytest.raises(InstanceError):
        Path(("a", "b"), ())
    inst = UnicastInstance.build([("a", "b")], [("a", "b")])
    with pytest.raises(InstanceError):
        inst.path_from_nodes(["b", "c"])
    with pytest.raises(InstanceError):
        inst.check_path(Path(("a", "b"), (4,)))


def test_hop_distances_with_deletions():
    gap = base_instance(5)
    inst = gap.instance
    assert hop_distance(inst, (), "s1", "t1") == 3
    assert hop_distance(inst, gap.cut_edges, "s1", "t1") == 5
    assert hop_distance(inst, range(len(inst.edges)), "s1", "t1") == math.inf
    assert hop_distances_from(inst, "s1")["S"] == 1


def test_weighted_distance_is_exact():
    inst = UnicastInstance.build([("a", "b"), ("b", "c"), ("a", "c")], [("a", "c")])
    lengths = {0: Fraction(1, 3), 1: Fraction(1, 3), 2: Fraction(1, 2)}
    assert weighted_distance(inst, lengths, "a", "c") == Fraction(1, 2)
    lengths[2] = Fraction(1)
    assert weighted_distance(inst, lengths, "a", "c") == Fraction(2, 3)
    with pytest.raises(InstanceError):
        weighted_distance(inst, {0: 1}, "a", "c")


def test_subinstance_and_scaling():
    inst = random_instance(5, max_sessions=4)
    sub = subinstance(inst, [inst.k - 1])
    assert sub.sessions == (inst.sessions[-1],)
    assert scale_demands(inst, 3).total_demand == 3 * inst.total_demand
    with pytest.raises(InstanceError):
        subinstance(inst, [])


def test_number_json_forms():
    assert num_to_json(Fraction(3, 1)) == 3
    assert num_to_json(Fraction(3, 4)) == "3/4"
    assert num_from_json("3/4") == Fraction(3, 4)
    with pytest.raises(InstanceError):
        num_from_json(True)


@given(st.integers(0, 10_000))
def test_weighted_distances_obey_triangle_inequality(seed):
    inst = random_instance(seed)
    lengths = {eid: (eid * 7 + seed) % 5 + 1 for eid in range(len(inst.edges))}
    table = {v: weighted_distances_from(inst, lengths, v) for v in inst.nodes}
    for x in inst.nodes:
        for y in inst.nodes:
            assert table[x][y] == table[y][x]
            for z in inst.nodes:
                assert table[x][z] <= table[x][y] + table[y][z]


@given(st.integers(0, 10_000))
def test_random_instances_roundtrip_through_json(seed):
    inst = random_instance(seed)
    assert UnicastInstance.from_json(json.loads(json.dumps(inst.to_json()))) == inst
