"""Hop-bounded path primitives: the layered shortest-path DP and explicit
enumeration of the simple short paths."""

from __future__ import annotations

from typing import Iterator, Mapping, Sequence

from ..instance import Number, Path, UnicastInstance, hop_distances_from


class HopLayeredDP:
    """Shortest walks with at most T hops, by dynamic programming over hop layers.

    Arcs are relaxed in (tail index, edge id) order with strict improvement, so
    ties resolve to the first arc in that order and results are deterministic.
    Per (source, sink, T) the arcs are pruned to those that can lie on a
    ≤T-hop source-sink walk at each layer: arc a->b survives at layer h iff
    hop(s, a) ≤ h-1 and hop(b, t) ≤ T-h.  This keeps the optimum intact.
    """

    def __init__(self, instance: UnicastInstance):
        self.instance = instance
        idx = instance.node_index
        arcs = []
        for eid, e in enumerate(instance.edges):
            arcs.append((idx[e.u], idx[e.v], eid))
            arcs.append((idx[e.v], idx[e.u], eid))
        arcs.sort()
        self.arcs = arcs
        self.n = len(instance.nodes)
        self._plans: dict[tuple[int, int, int], list[list[tuple[int, int, int]]] | None] = {}

    def _plan(self, s: int, t: int, T: int) -> list[list[tuple[int, int, int]]] | None:
        key = (s, t, T)
        if key not in self._plans:
            names = self.instance.nodes
            idx = self.instance.node_index
            hs = {idx[v]: d for v, d in hop_distances_from(self.instance, names[s]).items()}
            ht = {idx[v]: d for v, d in hop_distances_from(self.instance, names[t]).items()}
            if ht.get(s, T + 1) > T:
                self._plans[key] = None
            else:
                far = T + 1
                self._plans[key] = [
                    [arc for arc in self.arcs if hs.get(arc[0], far) <= h and ht.get(arc[1], far) <= T - h - 1]
                    for h in range(T)
                ]
        return self._plans[key]

    def shortest(
        self, src: str, dst: str, T: int, lengths: Sequence[Number]
    ) -> tuple[Path, Number] | None:
        idx = self.instance.node_index
        s, t = idx[src], idx[dst]
        if s == t:
            return Path((src,), ()), 0
        plan = self._plan(s, t, T)
        if plan is None:
            return None
        dist: dict[int, Number] = {s: 0}
        parents = []
        for layer in plan:
            new = dict(dist)
            par: dict[int, tuple[int, int]] = {}
            for a, b, eid in layer:
                da = dist.get(a)
                if da is None:
                    continue
                nd = da + lengths[eid]
                cur = new.get(b)
                if cur is None or nd < cur:
                    new[b] = nd
                    par[b] = (a, eid)
            parents.append(par)
            dist = new
        nodes_rev = [t]
        edges_rev = []
        v, h = t, T
        while h > 0:
            par = parents[h - 1].get(v)
            if par is None:
                h -= 1
                continue
            a, eid = par
            edges_rev.append(eid)
            nodes_rev.append(a)
            v, h = a, h - 1
        names = self.instance.nodes
        walk_nodes = [names[x] for x in reversed(nodes_rev)]
        walk_edges = list(reversed(edges_rev))
        path = remove_cycles(walk_nodes, walk_edges)
        length = sum((lengths[e] for e in path.edges), 0)
        return path, length


def remove_cycles(nodes: Sequence[str], edges: Sequence[int]) -> Path:
    out_nodes: list[str] = []
    out_edges: list[int] = []
    pos: dict[str, int] = {}
    for h, x in enumerate(nodes):
        if x in pos:
            cut = pos[x]
            for y in out_nodes[cut + 1 :]:
                del pos[y]
            del out_nodes[cut + 1 :]
            del out_edges[cut:]
        else:
            pos[x] = len(out_nodes)
            out_nodes.append(x)
        if h < len(edges) and len(out_edges) < len(out_nodes):
            out_edges.append(edges[h])
    return Path(tuple(out_nodes), tuple(out_edges[: len(out_nodes) - 1]))


def lengths_list(instance: UnicastInstance, lengths: Mapping[int, Number]) -> list[Number]:
    return [lengths[eid] for eid in range(len(instance.edges))]


def hop_bounded_shortest_path(
    instance: UnicastInstance, lengths: Mapping[int, Number], i: int, T: int
) -> tuple[Path, Number] | None:
    """Minimum-length s_i ~> t_i path with at most T hops, or None if t_i is
    more than T hops away.  Exact for int/Fraction lengths."""
    if T < 1:
        raise ValueError("hop bound T must be >= 1")
    s = instance.sessions[i]
    return HopLayeredDP(instance).shortest(s.source, s.sink, T, lengths_list(instance, lengths))


class PathLimitExceeded(RuntimeError):
    pass


def enumerate_paths(
    instance: UnicastInstance, src: str, dst: str, T: int, limit: int | None = None
) -> Iterator[Path]:
    """All simple src ~> dst paths with at most T hops, parallel edges kept distinct.

    Depth-first in adjacency (edge-id) order.  Raises PathLimitExceeded after
    ``limit`` paths.
    """
    if src == dst:
        yield Path((src,), ())
        return
    adj = instance.adjacency
    count = 0
    nodes = [src]
    edges: list[int] = []
    on_path = {src}

    def dfs(x: str) -> Iterator[Path]:
        nonlocal count
        if len(edges) == T:
            return
        for eid, y in adj[x]:
            if y in on_path:
                continue
            if y == dst:
                count += 1
                if limit is not None and count > limit:
                    raise PathLimitExceeded(f"more than {limit} simple paths of <= {T} hops")
                yield Path(tuple(nodes) + (y,), tuple(edges) + (eid,))
                continue
            on_path.add(y)
            nodes.append(y)
            edges.append(eid)
            yield from dfs(y)
            edges.pop()
            nodes.pop()
            on_path.discard(y)

    yield from dfs(src)
