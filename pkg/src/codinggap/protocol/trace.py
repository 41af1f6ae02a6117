"""Synchronous-round protocol traces and their exact replay.

Coding traces carry GF(2) coefficient vectors over the global source-bit
space: session i owns bits offset_i .. offset_i + d_i - 1, where offset_i is
the demand prefix sum.  Vectors are Python ints used as bitmasks.  Routing
traces carry (session, copy) descriptors and may only forward what arrived.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from ..instance import InstanceError, UnicastInstance
from ..routing import Schedule


class ReplayError(RuntimeError):
    """A trace violates capacity or causality, or leaves a session undelivered."""


def bit_offsets(instance: UnicastInstance) -> list[int]:
    out, acc = [], 0
    for s in instance.sessions:
        out.append(acc)
        acc += s.demand
    return out


def session_mask(instance: UnicastInstance, i: int) -> int:
    off = bit_offsets(instance)[i]
    return ((1 << instance.sessions[i].demand) - 1) << off


class Span:
    """A GF(2) subspace kept as an echelon basis keyed by leading bit."""

    __slots__ = ("basis",)

    def __init__(self) -> None:
        self.basis: dict[int, int] = {}

    def reduce(self, v: int) -> int:
        basis = self.basis
        while v:
            lead = v.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                return v
            v ^= b
        return 0

    def add(self, v: int) -> bool:
        r = self.reduce(v)
        if r:
            self.basis[r.bit_length() - 1] = r
            return True
        return False

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class Transmission:
    """One sub-packet on an edge in one round.  dir 0 is u->v of the stored edge.

    Exactly one of ``coeffs`` (coding) or ``session``/``copy`` (routing) is set.
    """

    edge: int
    direction: int
    coeffs: int | None = None
    session: int | None = None
    copy: int | None = None

    def to_json(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"edge": self.edge, "dir": self.direction}
        if self.coeffs is not None:
            rec["coeffs"] = format(self.coeffs, "x")
        else:
            rec["session"] = self.session
            rec["copy"] = self.copy
        return rec

    @classmethod
    def from_json(cls, rec: Mapping[str, Any]) -> Transmission:
        edge, d = int(rec["edge"]), int(rec["dir"])
        if d not in (0, 1):
            raise InstanceError(f"dir must be 0 or 1, got {d}")
        if "coeffs" in rec:
            return cls(edge, d, coeffs=int(str(rec["coeffs"]), 16))
        return cls(edge, d, session=int(rec["session"]), copy=int(rec["copy"]))


@dataclass(frozen=True)
class ProtocolTrace:
    rounds: tuple[tuple[Transmission, ...], ...]

    @property
    def length(self) -> int:
        return len(self.rounds)

    @property
    def is_routing(self) -> bool:
        return all(t.coeffs is None for rnd in self.rounds for t in rnd)

    def to_json(self) -> dict[str, Any]:
        return {"rounds": [[t.to_json() for t in rnd] for rnd in self.rounds]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | Sequence[Any]) -> ProtocolTrace:
        try:
            rounds = data["rounds"] if isinstance(data, Mapping) else data
            return cls(tuple(tuple(Transmission.from_json(t) for t in rnd) for rnd in rounds))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed trace: {exc}") from exc


def trace_from_rounds(rounds: Iterable[Iterable[Transmission]]) -> ProtocolTrace:
    out = [tuple(r) for r in rounds]
    while out and not out[-1]:
        out.pop()
    return ProtocolTrace(tuple(out))


@dataclass(frozen=True)
class CompletionTimes:
    times: tuple[int, ...]

    @property
    def makespan(self) -> int:
        return max(self.times, default=0)

    def __iter__(self):
        return iter(self.times)

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> int:
        return self.times[i]


def _tail_head(instance: UnicastInstance, t: Transmission, r: int) -> tuple[str, str]:
    if not 0 <= t.edge < len(instance.edges):
        raise ReplayError(f"round {r}: unknown edge {t.edge}")
    e = instance.edges[t.edge]
    return (e.u, e.v) if t.direction == 0 else (e.v, e.u)


def _count_capacity(instance: UnicastInstance, used: dict[tuple[int, int], int], t: Transmission, r: int) -> None:
    key = (t.edge, t.direction)
    used[key] = used.get(key, 0) + 1
    if used[key] > instance.edges[t.edge].capacity:
        raise ReplayError(
            f"round {r}: edge {t.edge} dir {t.direction} carries {used[key]} sub-packets, capacity {instance.edges[t.edge].capacity}"
        )


def replay_coding(instance: UnicastInstance, trace: ProtocolTrace) -> CompletionTimes:
    """Replay a GF(2)-linear trace; T_i is the first round after which t_i can decode."""
    offsets = bit_offsets(instance)
    nbits = instance.total_demand
    spans: dict[str, Span] = {v: Span() for v in instance.nodes}
    for i, s in enumerate(instance.sessions):
        for c in range(s.demand):
            spans[s.source].add(1 << (offsets[i] + c))
    times: list[int | None] = [0 if s.source == s.sink else None for s in instance.sessions]
    sinks_of: dict[str, list[int]] = {}
    for i, s in enumerate(instance.sessions):
        sinks_of.setdefault(s.sink, []).append(i)

    for r, rnd in enumerate(trace.rounds, start=1):
        used: dict[tuple[int, int], int] = {}
        deliveries = []
        for t in rnd:
            if t.coeffs is None:
                if t.session is None or t.copy is None:
                    raise ReplayError(f"round {r}: transmission without a descriptor")
                if not (0 <= t.session < instance.k and 0 <= t.copy < instance.sessions[t.session].demand):
                    raise ReplayError(f"round {r}: unknown packet ({t.session},{t.copy})")
                vec = 1 << (offsets[t.session] + t.copy)
            else:
                vec = t.coeffs
            if vec < 0 or vec >> nbits:
                raise ReplayError(f"round {r}: coefficient vector outside the {nbits}-bit source space")
            tail, head = _tail_head(instance, t, r)
            if vec not in spans[tail]:
                raise ReplayError(f"round {r}: edge {t.edge} dir {t.direction}: {tail} sends a vector outside its span")
            _count_capacity(instance, used, t, r)
            deliveries.append((head, vec))
        touched = set()
        for head, vec in deliveries:
            if spans[head].add(vec):
                touched.add(head)
        for node in touched:
            for i in sinks_of.get(node, ()):
                if times[i] is None and _decodes(spans[node], offsets[i], instance.sessions[i].demand):
                    times[i] = r
    missing = [i for i, t in enumerate(times) if t is None]
    if missing:
        raise ReplayError(f"sessions {missing} undelivered after {trace.length} rounds")
    return CompletionTimes(tuple(t for t in times if t is not None))


def _decodes(span: Span, offset: int, demand: int) -> bool:
    return all((1 << (offset + c)) in span for c in range(demand))


def replay_routing_trace(instance: UnicastInstance, trace: ProtocolTrace) -> CompletionTimes:
    """Store-and-forward replay: a node may only send packets it holds at the
    start of the round."""
    held: dict[str, set[tuple[int, int]]] = {v: set() for v in instance.nodes}
    for i, s in enumerate(instance.sessions):
        held[s.source].update((i, c) for c in range(s.demand))
    times: list[int | None] = [0 if s.source == s.sink else None for s in instance.sessions]
    got: dict[int, set[int]] = {i: set() for i in range(instance.k)}
    for r, rnd in enumerate(trace.rounds, start=1):
        used: dict[tuple[int, int], int] = {}
        arrivals = []
        for t in rnd:
            if t.session is None or t.copy is None:
                raise ReplayError(f"round {r}: routing trace carries a coded vector")
            tail, head = _tail_head(instance, t, r)
            pkt = (t.session, t.copy)
            if pkt not in held[tail]:
                raise ReplayError(f"round {r}: edge {t.edge}: packet {pkt} forwarded from {tail} before arrival")
            _count_capacity(instance, used, t, r)
            arrivals.append((head, pkt))
        for head, pkt in arrivals:
            held[head].add(pkt)
            i = pkt[0]
            if head == instance.sessions[i].sink and times[i] is None:
                got[i].add(pkt[1])
                if len(got[i]) == instance.sessions[i].demand:
                    times[i] = r
    missing = [i for i, t in enumerate(times) if t is None]
    if missing:
        raise ReplayError(f"sessions {missing} undelivered after {trace.length} rounds")
    return CompletionTimes(tuple(t for t in times if t is not None))


def schedule_to_trace(instance: UnicastInstance, schedule: Schedule) -> ProtocolTrace:
    rounds: dict[int, list[Transmission]] = {}
    for p in schedule.packets:
        if len(p.departures) != p.path.hops:
            raise ReplayError(f"packet ({p.session},{p.copy}) needs one departure per hop")
        for (eid, a, _), r in zip(p.path.arcs(), p.departures):
            if r < 1:
                raise ReplayError(f"packet ({p.session},{p.copy}) departs at round {r} < 1")
            d = instance.edges[eid].direction(a)
            rounds.setdefault(r, []).append(Transmission(eid, d, session=p.session, copy=p.copy))
    horizon = max(rounds, default=0)
    return ProtocolTrace(tuple(tuple(rounds.get(r, ())) for r in range(1, horizon + 1)))


def replay_routing(instance: UnicastInstance, schedule: Schedule | ProtocolTrace) -> CompletionTimes:
    trace = schedule_to_trace(instance, schedule) if isinstance(schedule, Schedule) else schedule
    return replay_routing_trace(instance, trace)


def routing_as_coding(instance: UnicastInstance, trace: ProtocolTrace) -> ProtocolTrace:
    """Replace each (session, copy) descriptor by its unit coefficient vector."""
    offsets = bit_offsets(instance)
    rounds = []
    for rnd in trace.rounds:
        out = []
        for t in rnd:
            if t.coeffs is not None:
                out.append(t)
            else:
                assert t.session is not None and t.copy is not None
                out.append(Transmission(t.edge, t.direction, coeffs=1 << (offsets[t.session] + t.copy)))
        rounds.append(tuple(out))
    return ProtocolTrace(tuple(rounds))
