"""Moving cuts: verification, and extraction from cut-LP duals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from ..flow.dual import check_dual_feasible
from ..flow.exact import DEFAULT_PATH_LIMIT, ExactSolveError, solve_exact
from ..flow.mwu import DEFAULT_EPS, solve_mwu
from ..flow.solution import Duals, FlowSolution
from ..instance import InstanceError, UnicastInstance, num_to_json, weighted_distances_from
from .padded import Metric, pairwise_to_allpairs

CUT_THRESHOLD = Fraction(1, 10)


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class MovingCut:
    lengths: Mapping[int, int]
    subset: tuple[int, ...]
    capacity: int
    distance: int | float

    def to_json(self) -> dict[str, Any]:
        return {
            "lengths": {str(e): v for e, v in sorted(self.lengths.items())},
            "subset": list(self.subset),
            "capacity": self.capacity,
            "distance": self.distance,
            "claimed_lower_bound": self.distance,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> MovingCut:
        try:
            lengths = {int(e): v for e, v in data["lengths"].items()}
            return cls(lengths, tuple(int(i) for i in data["subset"]), int(data["capacity"]), data["distance"])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InstanceError(f"malformed moving cut: {exc}") from exc


@dataclass(frozen=True)
class CutReport:
    capacity: int
    distance: int | float
    demand: int
    valid: bool
    reasons: tuple[str, ...] = ()


def cut_distance(instance: UnicastInstance, lengths: Mapping[int, int], subset: Sequence[int]) -> int | float:
    """min over i, j in the subset of d_ℓ(s_i, t_j)."""
    best: int | float = math.inf
    sinks = {instance.sessions[j].sink for j in subset}
    done: set[str] = set()
    for i in subset:
        s = instance.sessions[i].source
        if s in done:
            continue
        done.add(s)
        dist = weighted_distances_from(instance, lengths, s)
        for t in sinks:
            best = min(best, dist.get(t, math.inf))
    return best


def cut_capacity(instance: UnicastInstance, lengths: Mapping[int, int]) -> int:
    return sum(e.capacity * (lengths[eid] - 1) for eid, e in enumerate(instance.edges))


def verify_moving_cut(instance: UnicastInstance, cut: MovingCut) -> CutReport:
    """Recompute capacity Σ c_e(ℓ_e - 1) and the subset's all-pairs distance.

    Valid iff capacity < Σ_{i in subset} d_i and both recorded fields match.
    """
    for eid in range(len(instance.edges)):
        if eid not in cut.lengths:
            raise CertificateError(f"moving cut misses edge {eid}")
        v = cut.lengths[eid]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise CertificateError(f"edge {eid}: moving-cut lengths must be integers >= 1, got {v!r}")
    if not cut.subset:
        raise CertificateError("moving cut needs a nonempty session subset")
    for i in cut.subset:
        if not 0 <= i < instance.k:
            raise CertificateError(f"session index {i} out of range")
    capacity = cut_capacity(instance, cut.lengths)
    distance = cut_distance(instance, cut.lengths, cut.subset)
    demand = sum(instance.sessions[i].demand for i in set(cut.subset))
    reasons = []
    if capacity >= demand:
        reasons.append(f"capacity {capacity} is not below the subset demand {demand}")
    if capacity != cut.capacity:
        reasons.append(f"recorded capacity {cut.capacity} differs from {capacity}")
    if distance != cut.distance:
        reasons.append(f"recorded distance {cut.distance} differs from {distance}")
    return CutReport(capacity, distance, demand, not reasons, tuple(reasons))


def make_cut(instance: UnicastInstance, lengths: Mapping[int, int], subset: Sequence[int]) -> MovingCut:
    sub = tuple(sorted(set(subset)))
    return MovingCut(dict(lengths), sub, cut_capacity(instance, lengths), cut_distance(instance, lengths, sub))


def unit_cut(instance: UnicastInstance) -> MovingCut:
    """All lengths 1 on the single session farthest from its sink.

    Capacity 0 is below any demand, so the hop distance is always certified.
    """
    from ..instance import hop_distance

    def dist(i: int) -> int | float:
        s = instance.sessions[i]
        return hop_distance(instance, (), s.source, s.sink)

    far = max(range(instance.k), key=lambda i: (dist(i), -i))
    return make_cut(instance, {eid: 1 for eid in range(len(instance.edges))}, [far])


def bucket_alpha(d: Sequence[Fraction | int]) -> Fraction:
    """1 + ln(Σd / min d), as the exact rational value of the nearest double."""
    return Fraction(1 + math.log(Fraction(sum(d)) / min(Fraction(x) for x in d)))


def bucket(h: Sequence[Fraction | int], d: Sequence[Fraction | int]) -> tuple[tuple[int, ...], Fraction]:
    """Smallest prefix I of the sessions sorted by h (descending) with
    min_{i∈I} h_i ≥ 1/(α Σ_{i∈I} d_i).  Indices come back in original order."""
    if len(h) != len(d) or not h:
        raise ValueError("h and d must be nonempty and of equal length")
    hs = [Fraction(x) for x in h]
    ds = [Fraction(x) for x in d]
    if any(x <= 0 for x in ds) or any(x < 0 for x in hs):
        raise ValueError("need d > 0 and h >= 0")
    if sum(a * b for a, b in zip(hs, ds)) < 1:
        raise CertificateError("bucketing needs Σ d_i h_i >= 1")
    alpha = bucket_alpha(ds)
    order = sorted(range(len(hs)), key=lambda i: (-hs[i], i))
    acc = Fraction(0)
    for j, i in enumerate(order):
        acc += ds[i]
        if hs[i] * alpha * acc >= 1:
            return tuple(sorted(order[: j + 1])), alpha
    raise CertificateError("no prefix satisfies the bucketing inequality")


def dual_to_moving_cut(instance: UnicastInstance, T: int, duals: Duals, seed: int = 0) -> MovingCut:
    """Round a cut-LP dual of value ≤ 1/10 into a verified moving cut."""
    value = duals.value(instance, T)
    if value > CUT_THRESHOLD:
        raise CertificateError(f"dual value {value} exceeds {CUT_THRESHOLD}; no moving cut follows")
    report = check_dual_feasible(instance, T, duals)
    if not report.feasible:
        raise CertificateError(f"duals are not feasible: {report.describe()}")
    h = [Fraction(x) for x in duals.h]
    d = [s.demand for s in instance.sessions]
    I, _alpha = bucket(h, d)
    scale = T * sum(d[i] for i in I)
    lengths = {eid: 1 + math.floor(Fraction(duals.lengths[eid]) * scale) for eid in range(len(instance.edges))}

    labels: list[str] = []
    index: dict[str, int] = {}
    for i in I:
        for v in (instance.sessions[i].source, instance.sessions[i].sink):
            if v not in index:
                index[v] = len(labels)
                labels.append(v)
    rows = []
    for v in labels:
        dist = weighted_distances_from(instance, lengths, v)
        rows.append([dist.get(u, math.inf) for u in labels])
    metric = Metric(rows, labels)
    pairs = [(index[instance.sessions[i].source], index[instance.sessions[i].sink]) for i in I]
    T_pair = int(min(metric(s, t) for s, t in pairs))
    sel = pairwise_to_allpairs(metric, pairs, T_pair, seed=seed, weights=[d[i] for i in I])
    cut = make_cut(instance, lengths, [I[j] for j in sel.indices])
    check = verify_moving_cut(instance, cut)
    if not check.valid:
        raise CertificateError("extracted cut fails verification: " + "; ".join(check.reasons))
    return cut


@dataclass(frozen=True)
class CodingBound:
    status: str  # "certified" or "no-certificate"
    bound: int | float | None
    cut: MovingCut | None
    solution: FlowSolution
    T: int

    def to_json(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "T": self.T,
            "bound": self.bound,
            "z": num_to_json(self.solution.z),
            "solution_status": self.solution.status,
            "cut": self.cut.to_json() if self.cut else None,
        }


def _solve(instance: UnicastInstance, T: int, eps: Fraction, path_limit: int) -> FlowSolution:
    try:
        return solve_exact(instance, T, path_limit=path_limit)
    except ExactSolveError:
        return solve_mwu(instance, T, eps)


def coding_lower_bound(
    instance: UnicastInstance,
    T_probe: int,
    seed: int = 0,
    eps: Fraction = DEFAULT_EPS,
    path_limit: int = 20_000,
) -> CodingBound:
    """Solve at T_probe (exactly when P(T) is small) and, if the dual value is
    at most 1/10, turn the dual into a moving cut whose distance is the bound."""
    sol = _solve(instance, T_probe, eps, min(path_limit, DEFAULT_PATH_LIMIT))
    if sol.dual_value(instance) > CUT_THRESHOLD:
        return CodingBound("no-certificate", None, None, sol, T_probe)
    cut = dual_to_moving_cut(instance, T_probe, sol.duals, seed)
    return CodingBound("certified", cut.distance, cut, sol, T_probe)


def best_coding_lower_bound(
    instance: UnicastInstance, T_max: int, seed: int = 0, eps: Fraction = DEFAULT_EPS, path_limit: int = 20_000
) -> CodingBound:
    """Probe T = 1, 2, 4, ... up to T_max and keep the largest certified bound."""
    from ..routing import doubling_horizons

    best: CodingBound | None = None
    last: CodingBound | None = None
    for T in doubling_horizons(T_max):
        res = coding_lower_bound(instance, T, seed, eps, path_limit)
        last = res
        if res.status == "certified" and (best is None or res.bound > best.bound):
            best = res
        if res.status == "no-certificate":
            break
    assert last is not None
    return best or last
