"""Small random instances for sweeps and property tests."""

from __future__ import annotations

from .instance import Edge, Session, UnicastInstance
from .rng import generator


def random_instance(
    seed: int,
    max_nodes: int = 10,
    max_edges: int = 18,
    max_sessions: int = 4,
    max_capacity: int = 2,
    max_demand: int = 2,
) -> UnicastInstance:
    """A random connected instance: a random spanning tree plus extra edges
    (parallel edges allowed), with sessions between distinct random nodes."""
    rng = generator(seed, "random-instance")
    n = int(rng.integers(2, max_nodes + 1))
    nodes = tuple(f"v{x}" for x in range(n))
    edges: list[Edge] = []
    order = rng.permutation(n)
    for pos in range(1, n):
        parent = order[int(rng.integers(0, pos))]
        edges.append(Edge(nodes[order[pos]], nodes[parent], int(rng.integers(1, max_capacity + 1))))
    extra = int(rng.integers(0, max_edges - (n - 1) + 1))
    for _ in range(extra):
        a, b = rng.choice(n, size=2, replace=False)
        edges.append(Edge(nodes[a], nodes[b], int(rng.integers(1, max_capacity + 1))))
    k = int(rng.integers(1, max_sessions + 1))
    sessions = []
    for _ in range(k):
        a, b = rng.choice(n, size=2, replace=False)
        sessions.append(Session(nodes[a], nodes[b], int(rng.integers(1, max_demand + 1))))
    return UnicastInstance(nodes, tuple(edges), tuple(sessions))
