"""From a fractional flow to an executable store-and-forward schedule.

Rounding samples one path per demand unit from the flow decomposition and
accepts when the congestion is within 4·T/z; the scheduler is a random-delay
greedy simulator.  Its constant β = makespan / (C + D) is measured, never
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .flow.mwu import DEFAULT_EPS, solve_mwu
from .flow.solution import FlowSolution
from .instance import InstanceError, Path, UnicastInstance
from .rng import generator

ROUND_RETRIES = 64
ACCEPT_FACTOR = 4
GREEDY_FACTOR = 8
SCHEDULE_ATTEMPTS = 8
ROUTE_THRESHOLD = Fraction(1, 10)
BETA_BOUND = 16


@dataclass(frozen=True)
class RoutedPacket:
    session: int
    copy: int
    path: Path


@dataclass(frozen=True)
class PathAssignment:
    packets: tuple[RoutedPacket, ...]
    capacities: tuple[int, ...]
    greedy_fallback: bool = False

    def loads(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p in self.packets:
            for eid in p.path.edges:
                out[eid] = out.get(eid, 0) + 1
        return out

    @property
    def congestion(self) -> Fraction:
        loads = self.loads()
        return max((Fraction(v, self.capacities[eid]) for eid, v in loads.items()), default=Fraction(0))

    @property
    def dilation(self) -> int:
        return max((p.path.hops for p in self.packets), default=0)

    def check(self, instance: UnicastInstance, T: int | None = None) -> list[str]:
        problems = []
        counts: dict[int, int] = {}
        for p in self.packets:
            s = instance.sessions[p.session]
            counts[p.session] = counts.get(p.session, 0) + 1
            if p.path.source != s.source or p.path.sink != s.sink:
                problems.append(f"packet ({p.session},{p.copy}) has wrong endpoints")
            if not p.path.is_simple():
                problems.append(f"packet ({p.session},{p.copy}) path is not simple")
            if T is not None and p.path.hops > T:
                problems.append(f"packet ({p.session},{p.copy}) path exceeds {T} hops")
        for i, s in enumerate(instance.sessions):
            if counts.get(i, 0) != s.demand:
                problems.append(f"session {i} has {counts.get(i, 0)} paths, demand {s.demand}")
        return problems


def assignment_from_paths(instance: UnicastInstance, paths: Sequence[Path]) -> PathAssignment:
    """One packet per given path, each matched to the first session with the
    same endpoints and demand left."""
    packets = []
    copies: dict[int, int] = {}
    for j, path in enumerate(paths):
        instance.check_path(path)
        i = next(
            (
                i
                for i, s in enumerate(instance.sessions)
                if (s.source, s.sink) == (path.source, path.sink) and copies.get(i, 0) < s.demand
            ),
            None,
        )
        if i is None:
            raise InstanceError(f"path {j} matches no session with demand left")
        copies[i] = copies.get(i, 0) + 1
        packets.append(RoutedPacket(i, copies[i] - 1, path))
    return PathAssignment(tuple(packets), tuple(e.capacity for e in instance.edges))


class RoundingError(RuntimeError):
    def __init__(self, message: str, best: PathAssignment):
        super().__init__(message)
        self.best = best


def round_paths(instance: UnicastInstance, solution: FlowSolution, seed: int = 0) -> PathAssignment:
    """Sample d_i paths per session proportionally to the path flows."""
    if solution.z <= 0:
        raise ValueError("rounding needs a solution with z > 0")
    caps = tuple(e.capacity for e in instance.edges)
    bound = ACCEPT_FACTOR * solution.T / solution.z
    support = []
    for i, s in enumerate(instance.sessions):
        if s.source == s.sink:
            support.append([(Path((s.source,), ()), Fraction(1))])
            continue
        pf = solution.flows_of(i)
        if not pf:
            raise ValueError(f"session {i} carries no flow")
        support.append([(f.path, f.value) for f in pf])

    best: PathAssignment | None = None
    for attempt in range(ROUND_RETRIES):
        rng = generator(seed, "round", attempt)
        packets = []
        for i, s in enumerate(instance.sessions):
            opts = support[i]
            total = sum(v for _, v in opts)
            probs = [float(v / total) for _, v in opts]
            picks = rng.choice(len(opts), size=s.demand, p=probs)
            packets += [RoutedPacket(i, c, opts[int(j)][0]) for c, j in enumerate(picks)]
        cand = PathAssignment(tuple(packets), caps)
        if best is None or cand.congestion < best.congestion:
            best = cand
        if cand.congestion <= bound:
            return cand

    greedy = _greedy(instance, support, caps)
    if greedy.congestion <= GREEDY_FACTOR * solution.T / solution.z:
        return greedy
    assert best is not None
    if greedy.congestion < best.congestion:
        best = greedy
    raise RoundingError(
        f"congestion {float(best.congestion):.3f} exceeds {GREEDY_FACTOR}·T/z after {ROUND_RETRIES} samples and greedy",
        best,
    )


def _greedy(instance: UnicastInstance, support, caps: tuple[int, ...]) -> PathAssignment:
    load = [0] * len(caps)
    packets = []
    for i, s in enumerate(instance.sessions):
        for c in range(s.demand):
            def cost(opt):
                path, value = opt
                worst = max((Fraction(load[e] + 1, caps[e]) for e in path.edges), default=Fraction(0))
                return (worst, -value)

            path, _ = min(support[i], key=cost)
            for e in path.edges:
                load[e] += 1
            packets.append(RoutedPacket(i, c, path))
    return PathAssignment(tuple(packets), caps, greedy_fallback=True)


@dataclass(frozen=True)
class ScheduledPacket:
    session: int
    copy: int
    path: Path
    departures: tuple[int, ...]

    @property
    def arrival(self) -> int:
        return self.departures[-1] if self.departures else 0


@dataclass(frozen=True)
class Schedule:
    packets: tuple[ScheduledPacket, ...]
    makespan: int
    delays: tuple[int, ...] = field(default=(), compare=False)

    def completion_times(self, k: int) -> tuple[int, ...]:
        out = [0] * k
        for p in self.packets:
            out[p.session] = max(out[p.session], p.arrival)
        return tuple(out)

    def check(self, instance: UnicastInstance) -> list[str]:
        """Capacity per (edge, direction, round), hop order and store-and-forward."""
        problems = []
        use: dict[tuple[int, int, int], int] = {}
        for p in self.packets:
            if len(p.departures) != p.path.hops:
                problems.append(f"packet ({p.session},{p.copy}) needs one departure per hop")
                continue
            prev = 0
            for (eid, a, _), r in zip(p.path.arcs(), p.departures):
                if r <= prev:
                    problems.append(f"packet ({p.session},{p.copy}) leaves {a} at round {r} before arriving")
                prev = r
                key = (eid, instance.edges[eid].direction(a), r)
                use[key] = use.get(key, 0) + 1
        for (eid, d, r), n in sorted(use.items()):
            if n > instance.edges[eid].capacity:
                problems.append(f"edge {eid} dir {d} carries {n} packets in round {r}")
        if self.makespan != max((p.arrival for p in self.packets), default=0):
            problems.append("makespan field does not match departures")
        return problems

    def to_json(self) -> dict[str, Any]:
        return {
            "packets": [
                {
                    "session": p.session,
                    "copy": p.copy,
                    "path": list(p.path.nodes),
                    "edges": list(p.path.edges),
                    "departures": list(p.departures),
                }
                for p in self.packets
            ],
            "makespan": self.makespan,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any], instance: UnicastInstance) -> Schedule:
        try:
            records = data["packets"] if isinstance(data, Mapping) else data
            packets = []
            for rec in records:
                nodes = tuple(str(x) for x in rec["path"])
                if "edges" in rec:
                    path = Path(nodes, tuple(int(e) for e in rec["edges"]))
                else:
                    path = instance.path_from_nodes(nodes)
                instance.check_path(path)
                packets.append(
                    ScheduledPacket(int(rec["session"]), int(rec["copy"]), path, tuple(int(r) for r in rec["departures"]))
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed schedule: {exc}") from exc
        makespan = max((p.arrival for p in packets), default=0)
        return cls(tuple(packets), makespan)


def simulate_delays(instance: UnicastInstance, packets: Sequence[RoutedPacket], delays: Sequence[int]) -> Schedule:
    """Greedy store-and-forward: packet p may take its first hop from round
    delays[p]+1 on; in every round packets claim their next arc in packet-id
    order while capacity lasts."""
    caps = [e.capacity for e in instance.edges]
    pos = [0] * len(packets)
    ready = [d + 1 for d in delays]
    deps: list[list[int]] = [[] for _ in packets]
    pending = [j for j, p in enumerate(packets) if p.path.hops > 0]
    r = 0
    while pending:
        r += 1
        used: dict[tuple[int, int], int] = {}
        still = []
        for j in pending:
            path = packets[j].path
            if ready[j] > r:
                still.append(j)
                continue
            h = pos[j]
            eid = path.edges[h]
            key = (eid, instance.edges[eid].direction(path.nodes[h]))
            if used.get(key, 0) < caps[eid]:
                used[key] = used.get(key, 0) + 1
                deps[j].append(r)
                pos[j] = h + 1
                ready[j] = r + 1
                if pos[j] < path.hops:
                    still.append(j)
            else:
                still.append(j)
        pending = still
    out = tuple(ScheduledPacket(p.session, p.copy, p.path, tuple(deps[j])) for j, p in enumerate(packets))
    return Schedule(out, max((x.arrival for x in out), default=0), tuple(delays))


def schedule(
    instance: UnicastInstance, assignment: PathAssignment, seed: int = 0, attempts: int = SCHEDULE_ATTEMPTS
) -> Schedule:
    """Random-delay greedy scheduling; the best of ``attempts`` delay draws.

    Attempt 0 uses zero delays, later attempts draw each delay uniformly from
    [0, ⌈C⌉).  Packets are ordered by (session, copy).
    """
    packets = sorted(assignment.packets, key=lambda p: (p.session, p.copy))
    frame = max(1, math.ceil(assignment.congestion))
    best: Schedule | None = None
    for a in range(attempts):
        if a == 0:
            delays = [0] * len(packets)
        else:
            rng = generator(seed, "delays", a)
            delays = [int(x) for x in rng.integers(0, frame, size=len(packets))]
        cand = simulate_delays(instance, packets, delays)
        if best is None or cand.makespan < best.makespan:
            best = cand
    assert best is not None
    return best


def measured_beta(assignment: PathAssignment, sched: Schedule) -> Fraction:
    denom = assignment.congestion + assignment.dilation
    return Fraction(sched.makespan) / denom if denom else Fraction(0)


class RouteError(RuntimeError):
    def __init__(self, message: str, solution: FlowSolution | None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class RouteResult:
    schedule: Schedule
    solution: FlowSolution | None
    assignment: PathAssignment

    @property
    def makespan(self) -> int:
        return self.schedule.makespan

    @property
    def beta(self) -> Fraction:
        return measured_beta(self.assignment, self.schedule)


Solver = Callable[[UnicastInstance, int], FlowSolution]


def doubling_horizons(T_max: int) -> list[int]:
    out, T = [], 1
    while T < T_max:
        out.append(T)
        T *= 2
    out.append(T_max)
    return out


def route(
    instance: UnicastInstance,
    T_max: int,
    seed: int = 0,
    eps: Fraction = DEFAULT_EPS,
    solver: Solver | None = None,
) -> RouteResult:
    """Doubling search over T; round and schedule at the first T with z ≥ 1/10."""
    if T_max < 1:
        raise ValueError("T_max must be >= 1")
    caps = tuple(e.capacity for e in instance.edges)
    if all(s.source == s.sink for s in instance.sessions):
        packets = tuple(
            RoutedPacket(i, c, Path((s.source,), ())) for i, s in enumerate(instance.sessions) for c in range(s.demand)
        )
        empty = tuple(ScheduledPacket(p.session, p.copy, p.path, ()) for p in packets)
        return RouteResult(Schedule(empty, 0), None, PathAssignment(packets, caps))
    solve = solver or (lambda inst, T: solve_mwu(inst, T, eps))
    last: FlowSolution | None = None
    for T in doubling_horizons(T_max):
        sol = solve(instance, T)
        last = sol
        if sol.z >= ROUTE_THRESHOLD:
            assignment = round_paths(instance, sol, seed)
            return RouteResult(schedule(instance, assignment, seed), sol, assignment)
    raise RouteError(f"no T <= {T_max} reaches z >= {ROUTE_THRESHOLD}", last)
