"""Completion-time objectives: weighted ℓ_p norms, dyadic bucketing of
sessions for routing, and throughput by pipelining copies of a schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from ..instance import Path, UnicastInstance, scale_demands, subinstance
from ..routing import Schedule, ScheduledPacket, route
from .trace import CompletionTimes, replay_routing

Number = int | Fraction | float


def _exact_root(x: Fraction, p: int) -> Fraction | None:
    def iroot(n: int) -> int | None:
        r = round(n ** (1.0 / p)) if n else 0
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**p == n:
                return c
        # large ints: fall back to integer Newton
        lo, hi = 0, 1 << (n.bit_length() // p + 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**p < n:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo**p == n else None

    num, den = iroot(x.numerator), iroot(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def lp_aggregate(times: Sequence[int] | CompletionTimes, w: Sequence[Number] | None = None, p: Number = math.inf) -> Fraction | float:
    """(Σ w_i T_i^p)^(1/p); p = ∞ gives the max over sessions with w_i > 0.

    Exact (a Fraction) whenever the p-th root is rational, a float otherwise.
    """
    T = list(times)
    weights = [Fraction(1)] * len(T) if w is None else [Fraction(x) for x in w]
    if len(weights) != len(T):
        raise ValueError("one weight per completion time required")
    if any(x < 0 for x in weights):
        raise ValueError("weights must be nonnegative")
    if p == math.inf:
        return Fraction(max((t for t, x in zip(T, weights) if x > 0), default=0))
    if p < 1:
        raise ValueError("p must be >= 1 or infinity")
    if isinstance(p, int) or (isinstance(p, Fraction) and p.denominator == 1) or float(p).is_integer():
        pi = int(p)
        total = sum((x * Fraction(t) ** pi for t, x in zip(T, weights)), Fraction(0))
        root = _exact_root(total, pi)
        return root if root is not None else float(total) ** (1.0 / pi)
    total_f = sum(float(x) * float(t) ** float(p) for t, x in zip(T, weights))
    return total_f ** (1.0 / float(p))


Router = Callable[[UnicastInstance], Schedule]


@dataclass(frozen=True)
class BucketClass:
    level: int
    sessions: tuple[int, ...]
    makespan: int
    offset: int


@dataclass(frozen=True)
class BucketedResult:
    times: CompletionTimes
    alpha: Fraction
    classes: tuple[BucketClass, ...]
    schedule: Schedule


def default_router(T_max: int = 64, seed: int = 0) -> Router:
    return lambda inst: route(inst, T_max, seed=seed).schedule


def bucketed_schedule(
    instance: UnicastInstance, coding_times: Sequence[int] | CompletionTimes, router: Router | None = None
) -> BucketedResult:
    """Route the dyadic classes T_i ∈ [2^j, 2^(j+1)) one after another.

    α is measured per class as makespan_j / max_{i in class} T_i; every
    routing completion time is asserted ≤ 4·α·T_i and the concatenated
    schedule is replayed on the full instance.
    """
    T = list(coding_times)
    if len(T) != instance.k:
        raise ValueError("one coding time per session required")
    router = router or default_router()
    levels: dict[int, list[int]] = {}
    for i, t in enumerate(T):
        if t < 0:
            raise ValueError("completion times are nonnegative")
        if t == 0:
            if instance.sessions[i].source != instance.sessions[i].sink:
                raise ValueError(f"session {i} cannot complete at round 0")
            continue
        levels.setdefault(t.bit_length() - 1, []).append(i)

    packets: list[ScheduledPacket] = []
    classes = []
    offset = 0
    alpha = Fraction(0)
    for j in sorted(levels):
        idx = levels[j]
        sub = subinstance(instance, idx)
        sched = router(sub)
        classes.append(BucketClass(j, tuple(idx), sched.makespan, offset))
        alpha = max(alpha, Fraction(sched.makespan, max(T[i] for i in idx)))
        for p in sched.packets:
            packets.append(
                ScheduledPacket(idx[p.session], p.copy, p.path, tuple(r + offset for r in p.departures))
            )
        offset += sched.makespan
    for i, s in enumerate(instance.sessions):
        if s.source == s.sink and T[i] == 0:
            packets += [ScheduledPacket(i, c, Path((s.source,), ()), ()) for c in range(s.demand)]
    combined = Schedule(tuple(packets), max((p.arrival for p in packets), default=0))
    times = replay_routing(instance, combined)
    for i, t in enumerate(times):
        if t > 4 * alpha * T[i]:
            raise AssertionError(f"session {i}: routing time {t} exceeds 4·α·T_i = {4 * alpha * T[i]}")
    return BucketedResult(times, alpha, tuple(classes), combined)


@dataclass(frozen=True)
class PipelineResult:
    rounds_used: int
    rate: Fraction
    offsets: tuple[int, ...]
    amortized_cost: Fraction
    schedule: Schedule

    @property
    def target_rate(self) -> Fraction:
        return 1 / self.amortized_cost if self.amortized_cost else Fraction(0)


def _usage(instance: UnicastInstance, schedule: Schedule) -> dict[tuple[int, int, int], int]:
    use: dict[tuple[int, int, int], int] = {}
    for p in schedule.packets:
        for (eid, a, _), r in zip(p.path.arcs(), p.departures):
            key = (eid, instance.edges[eid].direction(a), r)
            use[key] = use.get(key, 0) + 1
    return use


def pipeline(instance: UnicastInstance, schedule: Schedule, w: int) -> PipelineResult:
    """Run w copies of ``schedule``, copy c shifted by the smallest offset
    after copy c-1's that causes no capacity conflict.

    The combined schedule is replayed on the instance with demands scaled by
    w (copy c of packet (i, j) becomes packet (i, c·d_i + j)).  The amortized
    cost is the busiest (edge, direction) load of one copy per unit capacity,
    so 1/amortized_cost is the rate pipelining can approach.
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    base = _usage(instance, schedule)
    caps = [e.capacity for e in instance.edges]
    total: dict[tuple[int, int, int], int] = {}
    offsets: list[int] = []
    for c in range(w):
        o = 0 if c == 0 else offsets[-1] + 1
        while any(total.get((e, d, r + o), 0) + n > caps[e] for (e, d, r), n in base.items()):
            o += 1
        offsets.append(o)
        for (e, d, r), n in base.items():
            total[(e, d, r + o)] = total.get((e, d, r + o), 0) + n
    scaled = scale_demands(instance, w)
    packets = []
    for c, o in enumerate(offsets):
        for p in schedule.packets:
            d = instance.sessions[p.session].demand
            packets.append(
                ScheduledPacket(p.session, c * d + p.copy, p.path, tuple(r + o for r in p.departures))
            )
    combined = Schedule(tuple(packets), max((p.arrival for p in packets), default=0))
    times = replay_routing(scaled, combined)
    rounds_used = offsets[-1] + schedule.makespan
    assert times.makespan <= rounds_used
    per_dir: dict[tuple[int, int], int] = {}
    for (e, d, _), n in base.items():
        per_dir[(e, d)] = per_dir.get((e, d), 0) + n
    amortized = max((Fraction(n, caps[e]) for (e, _), n in per_dir.items()), default=Fraction(0))
    rate = Fraction(w, rounds_used) if rounds_used else Fraction(0)
    return PipelineResult(rounds_used, rate, tuple(offsets), amortized, combined)
