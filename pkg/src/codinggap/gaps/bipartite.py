"""Colored bipartite graphs with a girth floor.

Left node a carries one session color σ(a) ∈ [k] and right node b one edge
color c(b) ∈ [m]; every edge (a, b) is labelled (χ1, χ2) = (c(b), σ(a)).  The
four color properties then say exactly that the left class of σ and the right
class of c are joined by a perfect matching, for every (σ, c).  Classes all
have the same size q, so n1 = k·q and n2 = m·q.

Construction fills the m·k blocks one at a time with maximum matchings over
the pairs that keep every cycle at length ≥ g, and grows q geometrically
when a block cannot be completed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from ..rng import generator


class LimitExceeded(RuntimeError):
    """Construction gave up inside the caller's size limits."""


@dataclass(frozen=True)
class ColoredEdge:
    left: int
    right: int
    chi1: int  # edge color in [0, m)
    chi2: int  # session color in [0, k)


@dataclass(frozen=True)
class ColoredBipartiteGraph:
    n1: int
    n2: int
    m: int
    k: int
    g: int
    edges: tuple[ColoredEdge, ...]

    def left_adjacency(self) -> list[list[ColoredEdge]]:
        adj: list[list[ColoredEdge]] = [[] for _ in range(self.n1)]
        for e in self.edges:
            adj[e.left].append(e)
        return adj

    def right_adjacency(self) -> list[list[ColoredEdge]]:
        adj: list[list[ColoredEdge]] = [[] for _ in range(self.n2)]
        for e in self.edges:
            adj[e.right].append(e)
        return adj

    def girth(self) -> int | float:
        return bipartite_girth(self.n1, self.n2, [(e.left, e.right) for e in self.edges])

    def audit(self) -> list[str]:
        """The degree, four color properties and girth ≥ g; empty iff all hold."""
        problems = []
        for a, inc in enumerate(self.left_adjacency()):
            if len(inc) != self.m:
                problems.append(f"left node {a} has degree {len(inc)}, expected {self.m}")
            if sorted(e.chi1 for e in inc) != list(range(self.m)):
                problems.append(f"left node {a}: edge colors are not a complete set")
            if len({e.chi2 for e in inc}) > 1:
                problems.append(f"left node {a}: session colors differ")
        for b, inc in enumerate(self.right_adjacency()):
            if len(inc) != self.k:
                problems.append(f"right node {b} has degree {len(inc)}, expected {self.k}")
            if sorted(e.chi2 for e in inc) != list(range(self.k)):
                problems.append(f"right node {b}: session colors are not a complete set")
            if len({e.chi1 for e in inc}) > 1:
                problems.append(f"right node {b}: edge colors differ")
        girth = self.girth()
        if girth < self.g:
            problems.append(f"girth {girth} below {self.g}")
        return problems

    def to_json(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "m": self.m,
            "k": self.k,
            "g": self.g,
            "edges": [[e.left, e.right, e.chi1, e.chi2] for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> ColoredBipartiteGraph:
        edges = tuple(ColoredEdge(*map(int, e)) for e in data["edges"])
        return cls(int(data["n1"]), int(data["n2"]), int(data["m"]), int(data["k"]), int(data["g"]), edges)


def bipartite_girth(n1: int, n2: int, pairs: list[tuple[int, int]]) -> int | float:
    """Length of a shortest cycle (math.inf for a forest); parallel edges count as 2-cycles."""
    n = n1 + n2
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(pairs):
        adj[a].append((n1 + b, eid))
        adj[n1 + b].append((a, eid))
    best: int | float = math.inf
    for root in range(n):
        dist = {root: 0}
        via = {root: -1}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y, eid in adj[x]:
                if eid == via[x]:
                    continue
                if y not in dist:
                    dist[y] = dist[x] + 1
                    via[y] = eid
                    queue.append(y)
                else:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def moore_bound(m: int, k: int, g: int) -> tuple[int, int]:
    """Lower bounds on (n1, n2) for girth ≥ g with left degree m, right degree k.

    Balls of radius g/2 - 1 around any node are trees, so their sizes bound
    each side from below.
    """
    depth = g // 2 - 1
    n1 = n2 = 1
    for root_left in (True, False):
        counts = [0, 0]  # [left, right]
        side = 0 if root_left else 1
        counts[side] = 1
        frontier = 1
        deg_out = m if root_left else k
        for level in range(1, depth + 1):
            frontier *= deg_out if level == 1 else (deg_out - 1)
            side = 1 - side
            counts[side] += frontier
            deg_out = m if side == 0 else k
        n1 = max(n1, counts[0])
        n2 = max(n2, counts[1])
    return n1, n2


def colored_bipartite_size_bound(m: int, k: int, g: int) -> int:
    """The existence bound on n1, n2 for girth ≥ g: (9mk)^(g/2 + 3)."""
    return (9 * m * k) ** (g // 2 + 3)


def build_colored_bipartite(
    m: int,
    k: int,
    g: int,
    max_nodes: int = 50_000,
    seed: int = 0,
    growth: float = 1.25,
    attempts_per_size: int = 4,
) -> ColoredBipartiteGraph:
    """Randomized construction of a colored bipartite graph of girth ≥ g."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    if g < 4 or g % 2:
        raise ValueError("g must be an even number >= 4")
    lo1, lo2 = moore_bound(m, k, g)
    q = max(1, math.ceil(lo1 / k), math.ceil(lo2 / m))
    if (k + m) * q > max_nodes:
        raise LimitExceeded(
            f"girth {g} with degrees ({m}, {k}) needs n1 >= {lo1}, n2 >= {lo2}: "
            f"{(k + m) * q} nodes exceeds the limit {max_nodes}"
        )
    best_girth: int | float = 0
    while (k + m) * q <= max_nodes:
        for attempt in range(attempts_per_size):
            rng = generator(seed, "bipartite", q, attempt)
            result = _attempt(m, k, g, q, rng)
            if isinstance(result, ColoredBipartiteGraph):
                return result
            best_girth = max(best_girth, result)
        q = max(q + 1, math.ceil(q * growth))
    raise LimitExceeded(
        f"no girth-{g} colored bipartite graph found within {max_nodes} nodes "
        f"(last tried n1={k * q}, n2={m * q}; best partial girth {best_girth})"
    )


def _attempt(m: int, k: int, g: int, q: int, rng) -> ColoredBipartiteGraph | int:
    n1, n2 = k * q, m * q
    # left node sigma*q + x, right node c*q + y
    adj: list[list[int]] = [[] for _ in range(n1 + n2)]
    edges: list[ColoredEdge] = []
    blocks = [(c, sigma) for c in range(m) for sigma in range(k)]
    order = rng.permutation(len(blocks))
    for bi in order:
        c, sigma = blocks[int(bi)]
        lefts = [sigma * q + x for x in range(q)]
        rights = [c * q + y for y in range(q)]
        free_l, free_r = set(lefts), set(rights)
        while free_l:
            allowed = {}
            for a in sorted(free_l):
                near = _within(adj, a, g - 2)
                allowed[a] = [b for b in rights if b in free_r and n1 + b not in near]
            match = _max_matching(allowed, rng)
            progress = False
            for a, b in match.items():
                if n1 + b in _within(adj, a, g - 2):
                    continue
                adj[a].append(n1 + b)
                adj[n1 + b].append(a)
                edges.append(ColoredEdge(a, b, c, sigma))
                free_l.discard(a)
                free_r.discard(b)
                progress = True
            if not progress:
                return len(edges)
    graph = ColoredBipartiteGraph(n1, n2, m, k, g, tuple(sorted(edges, key=lambda e: (e.left, e.chi1))))
    return graph


def _within(adj: list[list[int]], start: int, depth: int) -> set[int]:
    seen = {start}
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
        if not frontier:
            break
    return seen


def _max_matching(allowed: dict[int, list[int]], rng) -> dict[int, int]:
    """Maximum bipartite matching by augmenting paths, in a random vertex order."""
    owner: dict[int, int] = {}
    lefts = list(allowed)
    lefts = [lefts[int(i)] for i in rng.permutation(len(lefts))]
    shuffled = {a: [allowed[a][int(i)] for i in rng.permutation(len(allowed[a]))] for a in lefts}

    def augment(a: int, seen: set[int]) -> bool:
        for b in shuffled[a]:
            if b in seen:
                continue
            seen.add(b)
            if b not in owner or augment(owner[b], seen):
                owner[b] = a
                return True
        return False

    for a in lefts:
        augment(a, set())
    return {a: b for b, a in owner.items()}
