"""Garg–Könemann multiplicative-weights solver for the hop-bounded
concurrent-flow LP.

The inner loop runs on floats.  Everything the solver returns is rebuilt
exactly: the primal is rescaled by its exact maximum congestion (so it is
feasible by construction) and the dual lengths are converted to Fractions with
h_i recomputed by the exact hop-layered DP, then normalised so Σ d_i h_i = 1.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..instance import Path, UnicastInstance
from .paths import HopLayeredDP
from .solution import Duals, FlowSolution, PathFlow, hop_infeasible_solution

DEFAULT_EPS = Fraction(1, 10)


def solve_mwu(
    instance: UnicastInstance,
    T: int,
    eps: Fraction | float = DEFAULT_EPS,
    seed: int = 0,
    max_phases: int = 100_000,
) -> FlowSolution:
    """Approximate max concurrent flow over P_i(T).

    Stops as soon as the best primal is within a (1+eps) factor of the best
    dual seen (a certified stop), or at the usual Garg–Könemann threshold
    Σ T c_e ℓ_e ≥ 1.  The algorithm is deterministic; ``seed`` is accepted
    for interface uniformity only.
    """
    del seed
    if T < 1:
        raise ValueError("hop bound T must be >= 1")
    eps_q = Fraction(eps).limit_denominator(10**6) if isinstance(eps, float) else Fraction(eps)
    if not 0 < eps_q < Fraction(1, 3):
        raise ValueError("eps must lie in (0, 1/3)")
    e = float(eps_q)
    dp = HopLayeredDP(instance)
    m = len(instance.edges)
    sessions = instance.sessions
    active = [i for i, s in enumerate(sessions) if s.source != s.sink]

    unit = [1] * m
    first_paths: dict[int, Path] = {}
    for i in active:
        res = dp.shortest(sessions[i].source, sessions[i].sink, T, unit)
        if res is None:
            return hop_infeasible_solution(instance, T, eps_q, i, "mwu")
        first_paths[i] = res[0]
    if not active:
        lengths = {eid: Fraction(0) for eid in range(m)}
        return FlowSolution(
            Fraction(1), T, eps_q, (), Duals(lengths, tuple(Fraction(0) for _ in sessions)), method="mwu"
        )

    cap = [float(T * ed.capacity) for ed in instance.edges]
    # z* >= lower: all demand on min-hop paths, scaled to fit
    load0 = [0.0] * m
    for i in active:
        for eid in first_paths[i].edges:
            load0[eid] += sessions[i].demand
    lower = min(cap[eid] / load0[eid] for eid in range(m) if load0[eid] > 0)
    scale = lower
    demand = {i: sessions[i].demand * scale for i in active}

    delta = (1 + e) * ((1 + e) * m) ** (-1 / e)
    ell = [delta / c for c in cap]
    phase_budget = math.ceil(2 * math.log((1 + e) / delta, 1 + e))

    flows: dict[tuple[int, tuple[int, ...]], float] = {}
    paths: dict[tuple[int, tuple[int, ...]], Path] = {}
    load = [0.0] * m
    sent = {i: 0.0 for i in active}
    best_primal, best_flows = 0.0, dict(flows)
    best_dual, best_ell = math.inf, list(ell)
    phases_since_scale = 0

    for _phase in range(max_phases):
        for i in active:
            s = sessions[i]
            remaining = demand[i]
            while remaining > 1e-15 * demand[i]:
                path, _ = dp.shortest(s.source, s.sink, T, ell)
                bottleneck = min(cap[eid] for eid in path.edges)
                amt = min(remaining, bottleneck)
                key = (i, path.edges)
                paths[key] = path
                flows[key] = flows.get(key, 0.0) + amt
                for eid in path.edges:
                    load[eid] += amt
                    ell[eid] *= 1 + e * amt / cap[eid]
                sent[i] += amt
                remaining -= amt
        phases_since_scale += 1

        congestion = max(load[eid] / cap[eid] for eid in range(m))
        primal = min(sent[i] / sessions[i].demand for i in active) / congestion
        if primal > best_primal:
            best_primal, best_flows = primal, dict(flows)
        weight = sum(c * x for c, x in zip(cap, ell))
        alpha = 0.0
        for i in active:
            _, length = dp.shortest(sessions[i].source, sessions[i].sink, T, ell)
            alpha += sessions[i].demand * length
        dual = weight / alpha
        if dual < best_dual:
            best_dual, best_ell = dual, list(ell)
        if best_primal * (1 + e) >= best_dual or weight >= 1:
            break
        if best_primal > 2 * scale:
            # the starting lower bound was loose; route closer to z* per phase
            scale = best_primal
            demand = {i: sessions[i].demand * scale for i in active}
            phases_since_scale = 0
        elif phases_since_scale >= phase_budget:
            # z* of the scaled problem is still large; double demands
            scale *= 2
            demand = {i: sessions[i].demand * scale for i in active}
            phases_since_scale = 0

    return _exact_solution(instance, T, eps_q, dp, active, best_flows, paths, best_ell)


def _exact_solution(
    instance: UnicastInstance,
    T: int,
    eps: Fraction,
    dp: HopLayeredDP,
    active: list[int],
    flows: dict[tuple[int, tuple[int, ...]], float],
    paths: dict[tuple[int, tuple[int, ...]], Path],
    ell: list[float],
) -> FlowSolution:
    sessions = instance.sessions
    exact = {key: Fraction(v) for key, v in flows.items() if v > 0}
    load: dict[int, Fraction] = {}
    for (_, edges), v in exact.items():
        for eid in edges:
            load[eid] = load.get(eid, Fraction(0)) + v
    congestion = max(v / (T * instance.edges[eid].capacity) for eid, v in load.items())
    per_session = {i: Fraction(0) for i in active}
    path_flows = []
    for key, v in sorted(exact.items()):
        val = v / congestion
        per_session[key[0]] += val
        path_flows.append(PathFlow(key[0], paths[key], val))
    z = min(per_session[i] / sessions[i].demand for i in active)

    L = [Fraction(x) for x in ell]
    h = [Fraction(0)] * instance.k
    for i in active:
        _, length = dp.shortest(sessions[i].source, sessions[i].sink, T, L)
        h[i] = Fraction(length)
    alpha = sum((sessions[i].demand * h[i] for i in active), Fraction(0))
    lengths = {eid: x / alpha for eid, x in enumerate(L)}
    h = [x / alpha for x in h]
    return FlowSolution(z, T, eps, tuple(path_flows), Duals(lengths, tuple(h)), method="mwu")
