"""Recheck every parameter claim of a gap instance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..instance import GapInstance, hop_distances_from, validate


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class GapReport:
    checks: tuple[Check, ...]
    min_cut_distance: int | float
    routing_lb: int | None
    forced_sessions: Fraction | None
    coding_makespan: int | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def lines(self) -> list[str]:
        out = [f"{'ok  ' if c.ok else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]
        if self.routing_lb is not None:
            out.append(f"routing makespan >= {self.routing_lb}")
        if self.forced_sessions is not None:
            out.append(f"sessions forced to completion >= b: k(1-(b-1)/r) = {self.forced_sessions}")
        return out


def verify_gap(
    gap: GapInstance, coding_makespan: Callable[[], int] | None = None
) -> GapReport:
    """Terminal disjointness, unit capacities and demands, connectivity,
    the counts f, k and |E| against (f, k, m), the ratios r and u, and the
    F-deleted hop distance of every session against b.

    ``coding_makespan``, when given, is called to replay a protocol whose
    makespan is then checked against a.
    """
    inst, p = gap.instance, gap.params
    checks: list[Check] = []

    terminals = [s.source for s in inst.sessions] + [s.sink for s in inst.sessions]
    dup = len(set(terminals)) != len(terminals)
    checks.append(Check("terminals disjoint", not dup, "all 2k terminals distinct" if not dup else "a terminal repeats"))
    caps = all(e.capacity == 1 for e in inst.edges)
    dem = all(s.demand == 1 for s in inst.sessions)
    checks.append(Check("unit capacities", caps, "c_e = 1 on every edge" if caps else "some c_e != 1"))
    checks.append(Check("unit demands", dem, "d_i = 1 for every session" if dem else "some d_i != 1"))
    problems = validate(inst)
    checks.append(Check("valid instance", not problems, "; ".join(problems) or "connected, well-formed"))
    bad_cut = [e for e in gap.cut_edges if not 0 <= e < len(inst.edges)]
    checks.append(Check("cut edges exist", not bad_cut, f"unknown ids {bad_cut}" if bad_cut else f"|F| = {len(gap.cut_edges)}"))

    f, k, m = len(gap.cut_edges), inst.k, len(inst.edges)
    checks.append(Check("f = |F|", f == p.f, f"|F| = {f}, f = {p.f}"))
    checks.append(Check("k = |S|", k == p.k, f"|S| = {k}, k = {p.k}"))
    checks.append(Check("|E| <= m", m <= p.m, f"|E| = {m}, m = {p.m}"))
    if f > 0:
        checks.append(Check("k/f >= r", Fraction(k, f) >= p.r, f"k/f = {Fraction(k, f)}, r = {p.r}"))
        checks.append(Check("m/f <= u", Fraction(p.m, f) <= p.u, f"m/f = {Fraction(p.m, f)}, u = {p.u}"))
    else:
        checks.append(Check("f > 0", False, "ratios k/f and m/f need a nonempty F"))

    min_dist: int | float = math.inf
    if not bad_cut and not problems:
        for s in inst.sessions:
            d = hop_distances_from(inst, s.source, gap.cut_edges).get(s.sink, math.inf)
            min_dist = min(min_dist, d)
        checks.append(Check("dist_{G-F}(s_i,t_i) >= b", min_dist >= p.b, f"min distance {min_dist}, b = {p.b}"))

    coding = None
    if coding_makespan is not None:
        coding = coding_makespan()
        checks.append(Check("coding makespan <= a", coding <= p.a, f"replayed makespan {coding}, a = {p.a}"))

    routing_lb = p.b if p.b <= p.r else None
    forced = k * (1 - Fraction(p.b - 1) / p.r) if p.r > 0 else None
    return GapReport(tuple(checks), min_dist, routing_lb, forced, coding)
