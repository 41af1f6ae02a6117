"""Exact feasibility check for cut-LP duals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..instance import InstanceError, Path, UnicastInstance
from .paths import HopLayeredDP, lengths_list
from .solution import Duals


@dataclass(frozen=True)
class DualReport:
    feasible: bool
    demand_sum: Fraction
    worst_session: int | None
    worst_path: Path | None
    worst_slack: Fraction | None

    def describe(self) -> str:
        parts = [f"feasible={self.feasible}", f"sum d_i h_i={self.demand_sum}"]
        if self.worst_session is not None:
            parts.append(f"worst session={self.worst_session} slack={self.worst_slack}")
        return " ".join(parts)


def check_dual_feasible(instance: UnicastInstance, T: int, duals: Duals) -> DualReport:
    """Check Σ_{e∈p} ℓ_e ≥ h_i on every p ∈ P_i(T) and Σ d_i h_i ≥ 1, exactly.

    Only the ℓ-shortest ≤T-hop path per session needs checking.  The worst
    (most negative, else smallest) slack is reported.
    """
    if len(duals.h) != instance.k:
        raise InstanceError("duals must carry one h_i per session")
    for eid in range(len(instance.edges)):
        if eid not in duals.lengths:
            raise InstanceError(f"duals miss edge {eid}")
        if duals.lengths[eid] < 0:
            raise InstanceError(f"negative dual length on edge {eid}")
    dp = HopLayeredDP(instance)
    L = [Fraction(x) for x in lengths_list(instance, duals.lengths)]
    feasible = True
    worst: tuple[Fraction, int, Path] | None = None
    for i, s in enumerate(instance.sessions):
        h = Fraction(duals.h[i])
        if h < 0:
            feasible = False
        res = dp.shortest(s.source, s.sink, T, L)
        if res is None:
            continue
        path, length = res
        slack = Fraction(length) - h
        if slack < 0:
            feasible = False
        if worst is None or slack < worst[0]:
            worst = (slack, i, path)
    demand_sum = sum((s.demand * Fraction(duals.h[i]) for i, s in enumerate(instance.sessions)), Fraction(0))
    if demand_sum < 1:
        feasible = False
    if worst is None:
        return DualReport(feasible, demand_sum, None, None, None)
    return DualReport(feasible, demand_sum, worst[1], worst[2], worst[0])
