from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codinggap.certificate.deletion import PremiseError, deletion_coding_lb, deletion_routing_lb
from codinggap.certificate.moving_cut import (
    CUT_THRESHOLD,
    CertificateError,
    MovingCut,
    best_coding_lower_bound,
    bucket,
    bucket_alpha,
    coding_lower_bound,
    dual_to_moving_cut,
    make_cut,
    unit_cut,
    verify_moving_cut,
)
from codinggap.certificate.padded import (
    Metric,
    MetricError,
    SelectionError,
    padded_decomposition,
    padding_beta,
    pairwise_to_allpairs,
)
from codinggap.flow.exact import solve_exact
from codinggap.flow.solution import Duals
from codinggap.generators import random_instance
from codinggap.gaps.base import base_instance, hub_edge
from codinggap.instance import UnicastInstance
from codinggap.protocol.xor import xor_star_protocol
from codinggap.protocol.trace import replay_coding


def _l1_metric(points: np.ndarray) -> Metric:
    return Metric(np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2))


# deletion bounds


@pytest.mark.parametrize("k", [5, 8, 16])
def test_deletion_routing_bound_on_base(k):
    b = deletion_routing_lb(base_instance(k))
    assert b.value == 5 and b.min_distance == 5


def test_deletion_routing_bound_caps_at_k_over_f():
    gap = base_instance(3)
    assert deletion_routing_lb(gap.instance, gap.cut_edges, 5).value == 3


def test_empty_deletion_gives_T():
    inst = base_instance(5).instance
    assert deletion_routing_lb(inst, (), 3).value == 3
    assert deletion_coding_lb(inst, (), 3).value == 3


def test_deletion_premise_is_checked():
    gap = base_instance(5)
    with pytest.raises(PremiseError):
        deletion_routing_lb(gap.instance, (), 4)
    with pytest.raises(PremiseError):
        # s_i to t_j is only 3 hops along the private paths
        deletion_coding_lb(gap.instance, gap.cut_edges, 4)


def test_deletion_needs_unit_instances():
    inst = UnicastInstance.build([("s", "t", 2)], [("s", "t")])
    with pytest.raises(PremiseError):
        deletion_routing_lb(inst, (), 1)


# metrics and padded decompositions


def test_metric_validation():
    with pytest.raises(MetricError):
        Metric([[0, 1], [2, 0]])
    with pytest.raises(MetricError):
        Metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(MetricError):
        Metric([[1]])
    m = Metric([[0, 1], [1, 0]], labels=["a", "b"])
    assert m(0, 1) == 1 and m.labels == ("a", "b")


def test_uniform_metric_small_delta_gives_singletons():
    m = Metric(np.ones((64, 64)) - np.eye(64))
    p = padded_decomposition(m, 0.5, seed=1)
    assert len(p.parts) == 64


def test_zero_delta_groups_coincident_points():
    m = Metric([[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    p = padded_decomposition(m, 0, seed=0)
    assert sorted(map(len, p.parts)) == [1, 2]


def test_padding_beta():
    assert padding_beta(1) == 1
    assert padding_beta(100) == math.ceil(8 * math.log(100))


@given(st.integers(0, 10_000), st.floats(0.5, 50))
def test_parts_have_weak_diameter_at_most_delta(seed, delta):
    rng = np.random.default_rng(seed)
    m = _l1_metric(rng.integers(0, 30, size=(30, 2)))
    p = padded_decomposition(m, delta, seed=seed)
    assert max(p.weak_diameters(m)) <= delta
    assert sorted(x for part in p.parts for x in part) == list(range(m.n))


@given(st.integers(0, 10_000))
def test_padded_mask_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    m = _l1_metric(rng.integers(0, 20, size=(15, 2)))
    p = padded_decomposition(m, 10, seed=seed)
    mask = p.padded_mask(m, 2.0)
    assert [bool(x) for x in mask] == [p.padded(m, x, 2.0) for x in range(m.n)]


@given(st.integers(0, 10_000), st.integers(9, 30), st.integers(4, 20))
def test_pairwise_selection_postconditions(seed, n, T):
    rng = np.random.default_rng(seed)
    src = rng.integers(0, 60, size=(n, 2))
    dst = src + np.stack([rng.integers(T, 2 * T, size=n), rng.integers(0, T, size=n)], axis=1)
    m = _l1_metric(np.concatenate([src, dst]))
    pairs = [(i, n + i) for i in range(n)]
    res = pairwise_to_allpairs(m, pairs, T, seed=seed)
    assert 9 * len(res.indices) >= n
    for i in res.indices:
        for j in res.indices:
            assert m(pairs[i][0], pairs[j][1]) > res.threshold
    assert res.threshold == Fraction(T - 1, 2 * padding_beta(n))


def test_pairwise_rejects_short_pairs():
    m = Metric([[0, 1], [1, 0]])
    with pytest.raises(SelectionError):
        pairwise_to_allpairs(m, [(0, 1)], 2)


# moving cuts


def test_hub_cut_on_base_five():
    inst = base_instance(5).instance
    lengths = {eid: 1 for eid in range(len(inst.edges))}
    lengths[hub_edge(5)] = 3
    cut = make_cut(inst, lengths, range(5))
    rep = verify_moving_cut(inst, cut)
    assert (rep.capacity, rep.distance, rep.demand, rep.valid) == (2, 3, 5, True)
    assert replay_coding(inst, xor_star_protocol(5)).makespan >= cut.distance


def test_verify_rejects_bad_cuts():
    inst = base_instance(5).instance
    lengths = {eid: 2 for eid in range(len(inst.edges))}
    rep = verify_moving_cut(inst, make_cut(inst, lengths, [0]))
    assert not rep.valid
    honest = make_cut(inst, {eid: 1 for eid in range(len(inst.edges))}, [0])
    lying = MovingCut(honest.lengths, honest.subset, honest.capacity, 9)
    assert not verify_moving_cut(inst, lying).valid
    with pytest.raises(CertificateError):
        verify_moving_cut(inst, MovingCut({0: 1}, (0,), 0, 3))
    with pytest.raises(CertificateError):
        verify_moving_cut(inst, MovingCut({e: 0 for e in range(len(inst.edges))}, (0,), 0, 0))


def test_moving_cut_json_roundtrip():
    inst = base_instance(5).instance
    cut = unit_cut(inst)
    data = json.loads(json.dumps(cut.to_json()))
    assert data["claimed_lower_bound"] == cut.distance == 3
    assert MovingCut.from_json(data) == cut


def test_bucket_examples():
    # uniform h: the whole set is needed
    I, alpha = bucket([Fraction(1, 4)] * 4, [1] * 4)
    assert alpha == bucket_alpha([1] * 4)
    assert len(I) >= 1
    # one heavy session alone qualifies
    I, _ = bucket([1, 0, 0], [1, 1, 1])
    assert I == (0,)
    with pytest.raises(CertificateError):
        bucket([0, 0], [1, 1])


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(1, 5)), min_size=1, max_size=8))
def test_bucket_prefix_inequality(data):
    h = [Fraction(a, 10) for a, _ in data]
    d = [b for _, b in data]
    if sum(x * y for x, y in zip(h, d)) < 1:
        return
    I, alpha = bucket(h, d)
    assert min(h[i] for i in I) * alpha * sum(d[i] for i in I) >= 1
    assert min(h[i] for i in I) >= max((h[j] for j in range(len(h)) if j not in I), default=0)


def test_dual_to_cut_on_hop_infeasible_base():
    inst = base_instance(5).instance
    sol = solve_exact(inst, 2)
    cut = dual_to_moving_cut(inst, 2, sol.duals)
    assert verify_moving_cut(inst, cut).valid
    assert cut.distance == 3


def test_dual_to_cut_refuses_large_duals():
    inst = base_instance(5).instance
    sol = solve_exact(inst, 4)
    assert sol.dual_value(inst) > CUT_THRESHOLD
    with pytest.raises(CertificateError):
        dual_to_moving_cut(inst, 4, sol.duals)


def test_dual_to_cut_refuses_infeasible_duals():
    inst = base_instance(5).instance
    bogus = Duals({eid: Fraction(0) for eid in range(len(inst.edges))}, tuple([Fraction(1)] * 5))
    with pytest.raises(CertificateError):
        dual_to_moving_cut(inst, 4, bogus)


def test_coding_lower_bound_statuses():
    inst = base_instance(5).instance
    assert coding_lower_bound(inst, 2).status == "certified"
    assert coding_lower_bound(inst, 4).status == "no-certificate"
    best = best_coding_lower_bound(inst, 16)
    assert best.status == "certified" and best.bound == 3


@given(st.integers(0, 100_000))
def test_extracted_cuts_are_sound(seed):
    inst = random_instance(seed)
    for T in range(1, 7):
        sol = solve_exact(inst, T)
        if sol.z > CUT_THRESHOLD:
            continue
        cut = dual_to_moving_cut(inst, T, sol.duals, seed)
        rep = verify_moving_cut(inst, cut)
        assert rep.valid
        assert rep.capacity < rep.demand
