"""Graph product T(I1, I2, B) of two gap instances along a colored bipartite graph.

Every non-cut outer edge becomes two anti-parallel arcs; arc χ1 of outer copy
i is replaced by session χ2 of inner copy j for each edge (i, j) of B, by
merging the arc's tail with that session's source and its head with the sink.
Outer cut edges become a2-hop paths whose first edge joins F₊.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from ..instance import Edge, GapInstance, GapParams, InstanceError, Session, UnicastInstance
from .bipartite import ColoredBipartiteGraph


@dataclass(frozen=True)
class Arc:
    """Directed use of an outer non-cut edge: dir 0 is u->v, 1 is v->u."""

    edge: int
    direction: int


@dataclass(frozen=True)
class MergeRecord:
    outer_copy: int
    arc: int  # χ1, index into ProductWiring.arcs
    inner_copy: int
    inner_session: int  # χ2


@dataclass(frozen=True)
class CutPathRecord:
    outer_edge: int
    outer_copy: int
    edges: tuple[int, ...]  # product edge ids from the outer edge's u to its v
    designated: int


@dataclass(frozen=True)
class ProductWiring:
    n1: int
    n2: int
    a2: int
    outer_sessions: int
    inner_sessions: int
    arcs: tuple[Arc, ...]
    merges: tuple[MergeRecord, ...]
    cut_paths: tuple[CutPathRecord, ...]
    inner_edge_offsets: tuple[int, ...]
    node_origin: Mapping[str, tuple[str, int, str]]  # product node -> (side, copy, factor node)

    def merge_for(self) -> dict[tuple[int, int], MergeRecord]:
        """(outer copy, arc) -> merge record."""
        return {(r.outer_copy, r.arc): r for r in self.merges}

    def cut_path_for(self) -> dict[tuple[int, int], CutPathRecord]:
        """(outer copy, outer edge) -> replacement path record."""
        return {(r.outer_copy, r.outer_edge): r for r in self.cut_paths}

    def check(self) -> list[str]:
        problems = []
        seen: dict[tuple[int, int], int] = {}
        for r in self.merges:
            seen[(r.outer_copy, r.arc)] = seen.get((r.outer_copy, r.arc), 0) + 1
        for i in range(self.n1):
            for a in range(len(self.arcs)):
                if seen.get((i, a), 0) != 1:
                    problems.append(f"arc {a} of outer copy {i} merged {seen.get((i, a), 0)} times")
        for c in self.cut_paths:
            if c.designated not in c.edges:
                problems.append(f"designated edge of cut path ({c.outer_copy},{c.outer_edge}) not on the path")
        return problems

    def to_json(self) -> dict[str, Any]:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "a2": self.a2,
            "outer_sessions": self.outer_sessions,
            "inner_sessions": self.inner_sessions,
            "arcs": [[a.edge, a.direction] for a in self.arcs],
            "merges": [[r.outer_copy, r.arc, r.inner_copy, r.inner_session] for r in self.merges],
            "cut_paths": [[c.outer_edge, c.outer_copy, list(c.edges), c.designated] for c in self.cut_paths],
            "inner_edge_offsets": list(self.inner_edge_offsets),
            "node_origin": {k: list(v) for k, v in sorted(self.node_origin.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> ProductWiring:
        try:
            return cls(
                n1=int(data["n1"]),
                n2=int(data["n2"]),
                a2=int(data["a2"]),
                outer_sessions=int(data["outer_sessions"]),
                inner_sessions=int(data["inner_sessions"]),
                arcs=tuple(Arc(int(e), int(d)) for e, d in data["arcs"]),
                merges=tuple(MergeRecord(*map(int, r)) for r in data["merges"]),
                cut_paths=tuple(
                    CutPathRecord(int(e), int(i), tuple(int(x) for x in edges), int(d))
                    for e, i, edges, d in data["cut_paths"]
                ),
                inner_edge_offsets=tuple(int(x) for x in data["inner_edge_offsets"]),
                node_origin={k: (str(v[0]), int(v[1]), str(v[2])) for k, v in data["node_origin"].items()},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed product wiring: {exc}") from exc


class ProductError(ValueError):
    pass


def outer_arcs(outer: GapInstance) -> tuple[Arc, ...]:
    arcs = []
    for eid in range(len(outer.instance.edges)):
        if eid not in outer.cut_edges:
            arcs += [Arc(eid, 0), Arc(eid, 1)]
    return tuple(arcs)


def product_params(p1: GapParams, p2: GapParams, n1: int, n2: int, girth: int | float) -> GapParams:
    """Parameter update of the product; b is capped by half the girth actually achieved."""
    b = p1.b * p2.b
    if girth != math.inf:
        b = min(b, int(girth) // 2)
    return GapParams(
        a=p1.a * p2.a,
        b=b,
        f=n1 * p1.f + n2 * p2.f,
        k=n1 * p1.k,
        m=p2.a * n1 * p1.f + n2 * p2.m,
        r=p1.r / (1 + 2 * p1.u / p2.r),
        u=p2.u * (1 + Fraction(p2.a, 2)) / (1 + p2.r / (2 * p1.u)),
    )


def product(outer: GapInstance, inner: GapInstance, B: ColoredBipartiteGraph) -> tuple[GapInstance, ProductWiring]:
    g1, g2 = outer.instance, inner.instance
    arcs = outer_arcs(outer)
    if B.m != len(arcs):
        raise ProductError(f"B has left degree {B.m}, outer instance has {len(arcs)} non-cut arcs")
    if B.k != g2.k:
        raise ProductError(f"B has right degree {B.k}, inner instance has {g2.k} sessions")
    for gi in (outer, inner):
        if any(e.capacity != 1 for e in gi.instance.edges) or any(s.demand != 1 for s in gi.instance.sessions):
            raise ProductError("product factors need unit capacities and demands")
    problems = B.audit()
    if problems:
        raise ProductError("colored bipartite graph fails its audit: " + "; ".join(problems[:3]))
    a2 = inner.params.a
    n1, n2 = B.n1, B.n2

    def oname(i: int, v: str) -> str:
        return f"o{i}.{v}"

    # merged inner terminals take the name of the outer node they merge with
    inner_alias: dict[tuple[int, str], str] = {}
    merges = []
    for e in B.edges:
        arc = arcs[e.chi1]
        ed = g1.edges[arc.edge]
        x, y = (ed.u, ed.v) if arc.direction == 0 else (ed.v, ed.u)
        sess = g2.sessions[e.chi2]
        inner_alias[(e.right, sess.source)] = oname(e.left, x)
        inner_alias[(e.right, sess.sink)] = oname(e.left, y)
        merges.append(MergeRecord(e.left, e.chi1, e.right, e.chi2))

    def iname(j: int, w: str) -> str:
        return inner_alias.get((j, w), f"i{j}.{w}")

    nodes: list[str] = []
    origin: dict[str, tuple[str, int, str]] = {}
    for i in range(n1):
        for v in g1.nodes:
            nodes.append(oname(i, v))
            origin[oname(i, v)] = ("outer", i, v)
    edges: list[Edge] = []
    cut_paths = []
    cut = []
    for i in range(n1):
        for eid in sorted(outer.cut_edges):
            ed = g1.edges[eid]
            chain = [oname(i, ed.u)]
            for h in range(1, a2):
                name = f"o{i}.{eid}~{h}"
                nodes.append(name)
                origin[name] = ("cut-path", i, f"{eid}~{h}")
                chain.append(name)
            chain.append(oname(i, ed.v))
            ids = []
            for a, b in zip(chain, chain[1:]):
                ids.append(len(edges))
                edges.append(Edge(a, b, 1))
            cut_paths.append(CutPathRecord(eid, i, tuple(ids), ids[0]))
            cut.append(ids[0])
    offsets = []
    for j in range(n2):
        for w in g2.nodes:
            name = iname(j, w)
            if name not in origin:
                nodes.append(name)
                origin[name] = ("inner", j, w)
        offsets.append(len(edges))
        for eid, ed in enumerate(g2.edges):
            edges.append(Edge(iname(j, ed.u), iname(j, ed.v), 1))
        cut += [offsets[-1] + eid for eid in sorted(inner.cut_edges)]
    sessions = [
        Session(oname(i, s.source), oname(i, s.sink), 1) for i in range(n1) for s in g1.sessions
    ]
    inst = UnicastInstance(tuple(nodes), tuple(edges), tuple(sessions))
    params = product_params(outer.params, inner.params, n1, n2, B.girth())
    wiring = ProductWiring(
        n1=n1,
        n2=n2,
        a2=a2,
        outer_sessions=g1.k,
        inner_sessions=g2.k,
        arcs=arcs,
        merges=tuple(merges),
        cut_paths=tuple(cut_paths),
        inner_edge_offsets=tuple(offsets),
        node_origin=origin,
    )
    return GapInstance(inst, frozenset(cut), params), wiring


def lemma_counts(p1: GapParams, p2: GapParams, n1: int, n2: int) -> tuple[int, int, int]:
    """(f₊, k₊, m₊) from the factor parameters."""
    return n1 * p1.f + n2 * p2.f, n1 * p1.k, p2.a * n1 * p1.f + n2 * p2.m
