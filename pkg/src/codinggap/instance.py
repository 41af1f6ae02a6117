"""Capacitated multiple-unicast instances and the graph primitives shared by
every other module.

Nodes are strings.  Edges are undirected, stored once, and addressed by their
zero-based position in ``UnicastInstance.edges``; parallel edges are allowed
and stay distinct.  Paths therefore carry both their node sequence and their
edge-id sequence.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path as FsPath
from typing import Any, Iterable, Mapping, Sequence

Number = int | Fraction


class InstanceError(ValueError):
    """Malformed instance data or a reference to something that does not exist."""


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    capacity: int = 1

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise InstanceError(f"node {node!r} is not an endpoint of {self}")

    def direction(self, tail: str) -> int:
        """0 when traversed u->v, 1 when traversed v->u."""
        if tail == self.u:
            return 0
        if tail == self.v:
            return 1
        raise InstanceError(f"node {tail!r} is not an endpoint of {self}")


@dataclass(frozen=True)
class Session:
    source: str
    sink: str
    demand: int = 1


@dataclass(frozen=True)
class Path:
    """A walk given by its node sequence and the edge ids between them."""

    nodes: tuple[str, ...]
    edges: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.edges) + 1:
            raise InstanceError("path needs exactly one more node than edges")

    @property
    def hops(self) -> int:
        return len(self.edges)

    @property
    def source(self) -> str:
        return self.nodes[0]

    @property
    def sink(self) -> str:
        return self.nodes[-1]

    def is_simple(self) -> bool:
        return len(set(self.nodes)) == len(self.nodes)

    def arcs(self) -> Iterable[tuple[int, str, str]]:
        for h, eid in enumerate(self.edges):
            yield eid, self.nodes[h], self.nodes[h + 1]


@dataclass(frozen=True)
class UnicastInstance:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    sessions: tuple[Session, ...]

    @classmethod
    def build(
        cls,
        edges: Iterable[Sequence[Any]],
        sessions: Iterable[Sequence[Any]],
        nodes: Iterable[str] | None = None,
    ) -> UnicastInstance:
        """Convenience constructor from ``(u, v[, c])`` and ``(s, t[, d])`` tuples.

        Without an explicit node list, nodes are collected in first-seen order.
        """
        edge_objs = tuple(Edge(str(e[0]), str(e[1]), int(e[2]) if len(e) > 2 else 1) for e in edges)
        sess_objs = tuple(
            Session(str(s[0]), str(s[1]), int(s[2]) if len(s) > 2 else 1) for s in sessions
        )
        if nodes is None:
            seen: dict[str, None] = {}
            for e in edge_objs:
                seen.setdefault(e.u)
                seen.setdefault(e.v)
            for s in sess_objs:
                seen.setdefault(s.source)
                seen.setdefault(s.sink)
            node_tuple = tuple(seen)
        else:
            node_tuple = tuple(str(n) for n in nodes)
        return cls(node_tuple, edge_objs, sess_objs)

    @property
    def k(self) -> int:
        return len(self.sessions)

    @property
    def total_demand(self) -> int:
        return sum(s.demand for s in self.sessions)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[int, str], ...]]:
        """node -> ((edge id, neighbour), ...) in edge-id order."""
        adj: dict[str, list[tuple[int, str]]] = {n: [] for n in self.nodes}
        for eid, e in enumerate(self.edges):
            if e.u in adj:
                adj[e.u].append((eid, e.v))
            if e.v in adj and e.v != e.u:
                adj[e.v].append((eid, e.u))
        return {n: tuple(lst) for n, lst in adj.items()}

    def check_node(self, node: str) -> None:
        if node not in self.node_index:
            raise InstanceError(f"unknown node {node!r}")

    def path_from_nodes(self, nodes: Sequence[str]) -> Path:
        """Resolve a node sequence to a path, taking the lowest edge id per hop."""
        eids = []
        for a, b in zip(nodes, nodes[1:]):
            eid = next((eid for eid, w in self.adjacency.get(a, ()) if w == b), None)
            if eid is None:
                raise InstanceError(f"no edge between {a!r} and {b!r}")
            eids.append(eid)
        return Path(tuple(nodes), tuple(eids))

    def check_path(self, path: Path) -> None:
        for eid, a, b in path.arcs():
            if not 0 <= eid < len(self.edges):
                raise InstanceError(f"unknown edge id {eid}")
            e = self.edges[eid]
            if {a, b} != {e.u, e.v}:
                raise InstanceError(f"edge {eid} does not join {a!r} and {b!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "edges": [[e.u, e.v, e.capacity] for e in self.edges],
            "sessions": [[s.source, s.sink, s.demand] for s in self.sessions],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> UnicastInstance:
        try:
            edges = tuple(Edge(str(u), str(v), _as_int(c, "capacity")) for u, v, c in data["edges"])
            sessions = tuple(
                Session(str(s), str(t), _as_int(d, "demand")) for s, t, d in data["sessions"]
            )
            nodes = tuple(str(n) for n in data["nodes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc
        return cls(nodes, edges, sessions)


def _as_int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InstanceError(f"{what} must be an integer, got {x!r}")
    return x


@dataclass(frozen=True)
class GapParams:
    """Parameter tuple (a, b, f, k, m, r, u) of a gap instance."""

    a: int
    b: int
    f: int
    k: int
    m: int
    r: Fraction
    u: Fraction

    def to_json(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "b": self.b,
            "f": self.f,
            "k": self.k,
            "m": self.m,
            "r": _num_to_json(self.r),
            "u": _num_to_json(self.u),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> GapParams:
        return cls(
            a=int(data["a"]),
            b=int(data["b"]),
            f=int(data["f"]),
            k=int(data["k"]),
            m=int(data["m"]),
            r=num_from_json(data["r"]),
            u=num_from_json(data["u"]),
        )


@dataclass(frozen=True)
class GapInstance:
    instance: UnicastInstance
    cut_edges: frozenset[int]
    params: GapParams

    def to_json(self) -> dict[str, Any]:
        data = self.instance.to_json()
        data["cut_edges"] = sorted(self.cut_edges)
        data["params"] = self.params.to_json()
        return data

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> GapInstance:
        try:
            cut = frozenset(int(e) for e in data["cut_edges"])
            params = GapParams.from_json(data["params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed gap instance: {exc}") from exc
        return cls(UnicastInstance.from_json(data), cut, params)


def _num_to_json(x: Number) -> int | str:
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def num_from_json(x: Any) -> Fraction:
    if isinstance(x, bool):
        raise InstanceError(f"expected a number, got {x!r}")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise InstanceError(f"expected a number, got {x!r}")


def num_to_json(x: Number) -> int | str:
    """Exact JSON form of a rational: an int, or a ``"p/q"`` string."""
    return _num_to_json(x)


def load_instance(path: str | FsPath) -> UnicastInstance | GapInstance:
    """Read an instance file; files carrying ``cut_edges`` load as gap instances."""
    try:
        data = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError(f"{path}: top level must be an object")
    if "cut_edges" in data:
        return GapInstance.from_json(data)
    return UnicastInstance.from_json(data)


def validate(instance: UnicastInstance) -> list[str]:
    """Return the violated invariants; empty iff the instance is valid."""
    problems: list[str] = []
    nodes = set(instance.nodes)
    if len(nodes) != len(instance.nodes):
        problems.append("duplicate node identifiers")
    if instance.k < 1:
        problems.append("at least one session required")
    for eid, e in enumerate(instance.edges):
        if e.u not in nodes or e.v not in nodes:
            problems.append(f"edge {eid} references an unknown node")
        if e.u == e.v:
            problems.append(f"edge {eid} is a self-loop")
        if e.capacity < 1:
            problems.append(f"edge {eid}: capacity ≥ 1 required")
    for i, s in enumerate(instance.sessions):
        if s.source not in nodes or s.sink not in nodes:
            problems.append(f"session {i} references an unknown node")
        if s.demand < 1:
            problems.append(f"session {i}: demand ≥ 1 required")
    if instance.nodes and not any("unknown node" in p for p in problems):
        seen = _component(instance, instance.nodes[0], frozenset())
        if len(seen) != len(nodes):
            problems.append("not connected")
    return problems


def _component(instance: UnicastInstance, start: str, removed: frozenset[int]) -> set[str]:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for eid, y in instance.adjacency[x]:
            if eid not in removed and y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def hop_distances_from(
    instance: UnicastInstance, source: str, removed: Iterable[int] = ()
) -> dict[str, int]:
    """BFS hop distances from ``source`` in G minus the edge ids in ``removed``.

    Unreachable nodes are absent from the result.
    """
    instance.check_node(source)
    removed = frozenset(removed)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for eid, y in instance.adjacency[x]:
            if eid not in removed and y not in dist:
                dist[y] = dx
                queue.append(y)
    return dist


def hop_distance(
    instance: UnicastInstance, removed: Iterable[int], u: str, v: str
) -> int | float:
    """Hop distance from u to v with the edges of ``removed`` deleted; ``math.inf`` if cut off."""
    instance.check_node(v)
    return hop_distances_from(instance, u, removed).get(v, math.inf)


def check_lengths(instance: UnicastInstance, lengths: Mapping[int, Number]) -> None:
    for eid in range(len(instance.edges)):
        if eid not in lengths:
            raise InstanceError(f"length assignment misses edge {eid}")
        if lengths[eid] < 0:
            raise InstanceError(f"negative length on edge {eid}")


def weighted_distances_from(
    instance: UnicastInstance, lengths: Mapping[int, Number], source: str
) -> dict[str, Number]:
    """Dijkstra from ``source``; exact when the lengths are ints or Fractions."""
    instance.check_node(source)
    index = instance.node_index
    dist: dict[str, Number] = {source: 0}
    done: set[str] = set()
    heap: list[tuple[Number, int, str]] = [(0, index[source], source)]
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for eid, y in instance.adjacency[x]:
            nd = d + lengths[eid]
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, index[y], y))
    return dist


def weighted_distance(
    instance: UnicastInstance, lengths: Mapping[int, Number], u: str, v: str
) -> Number | float:
    check_lengths(instance, lengths)
    instance.check_node(v)
    return weighted_distances_from(instance, lengths, u).get(v, math.inf)


def subinstance(instance: UnicastInstance, indices: Iterable[int]) -> UnicastInstance:
    """Same graph, sessions restricted to ``indices`` (kept in ascending order)."""
    idx = sorted(set(indices))
    if not idx:
        raise InstanceError("subinstance needs a nonempty index set")
    for i in idx:
        if not 0 <= i < instance.k:
            raise InstanceError(f"session index {i} out of range")
    return UnicastInstance(instance.nodes, instance.edges, tuple(instance.sessions[i] for i in idx))


def scale_demands(instance: UnicastInstance, factor: int) -> UnicastInstance:
    sessions = tuple(Session(s.source, s.sink, s.demand * factor) for s in instance.sessions)
    return UnicastInstance(instance.nodes, instance.edges, sessions)


@dataclass(frozen=True)
class DistanceTable:
    """All-pairs terminal distances under one length assignment, computed lazily per source."""

    instance: UnicastInstance
    lengths: Mapping[int, Number]
    _cache: dict[str, dict[str, Number]] = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, u: str, v: str) -> Number | float:
        if u not in self._cache:
            self._cache[u] = weighted_distances_from(self.instance, self.lengths, u)
        return self._cache[u].get(v, math.inf)
