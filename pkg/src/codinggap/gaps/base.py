"""The 5/3-gap star family: sources feed hub S, hub T feeds sinks, one S–T edge,
and a 3-hop private path from every s_i to every t_j with j != i.
"""

from __future__ import annotations

from fractions import Fraction

from ..instance import Edge, GapInstance, GapParams, Path, Session, UnicastInstance


def source(i: int) -> str:
    return f"s{i}"


def sink(i: int) -> str:
    return f"t{i}"


def path_nodes(i: int, j: int) -> tuple[str, str, str, str]:
    """Nodes of the 3-hop path from s_i to t_j (1-based session numbers)."""
    return (source(i), f"p{i}_{j}a", f"p{i}_{j}b", sink(j))


def base_edge_count(k: int) -> int:
    return 2 * k + 1 + 3 * k * (k - 1)


def base_instance(k: int) -> GapInstance:
    """Sessions are numbered 1..k in node names and 0..k-1 as indices.

    Edge ids: ``s_i–S`` are 0..k-1, ``S–T`` is k, ``T–t_i`` are k+1..2k, then
    the 3-hop paths for (i, j) in lexicographic order.  F = {S–T}.
    """
    if k < 2:
        raise ValueError("base instance needs k >= 2")
    nodes: list[str] = [source(i) for i in range(1, k + 1)] + ["S", "T"]
    nodes += [sink(i) for i in range(1, k + 1)]
    edges: list[Edge] = [Edge(source(i), "S") for i in range(1, k + 1)]
    edges.append(Edge("S", "T"))
    edges += [Edge("T", sink(i)) for i in range(1, k + 1)]
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                continue
            pn = path_nodes(i, j)
            nodes += [pn[1], pn[2]]
            edges += [Edge(pn[0], pn[1]), Edge(pn[1], pn[2]), Edge(pn[2], pn[3])]
    sessions = tuple(Session(source(i), sink(i)) for i in range(1, k + 1))
    inst = UnicastInstance(tuple(nodes), tuple(edges), sessions)
    m = len(edges)
    assert m == base_edge_count(k)
    params = GapParams(a=3, b=5, f=1, k=k, m=m, r=Fraction(k), u=Fraction(m))
    return GapInstance(inst, frozenset({k}), params)


def hub_edge(k: int) -> int:
    return k


def private_path_edges(k: int, i: int, j: int) -> tuple[int, int, int]:
    """Edge ids of the s_i -> t_j path (1-based i != j)."""
    if i == j or not (1 <= i <= k and 1 <= j <= k):
        raise ValueError("private paths exist only for i != j in 1..k")
    pos = (i - 1) * (k - 1) + (j - 1 if j < i else j - 2)
    first = 2 * k + 1 + 3 * pos
    return (first, first + 1, first + 2)


def derangement(k: int) -> list[int]:
    """The cyclic shift i -> i+1 (mod k), 1-based; fixed-point free for k >= 2."""
    return [i % k + 1 for i in range(1, k + 1)]


def permutation_paths(k: int) -> list[Path]:
    """Hand-built makespan-5 routes s_i ~> t_σ(i) -> T -> t_i, one per session."""
    sigma = derangement(k)
    out = []
    for i in range(1, k + 1):
        j = sigma[i - 1]
        pe = private_path_edges(k, i, j)
        nodes = path_nodes(i, j) + ("T", sink(i))
        edges = pe + (k + j, k + i)
        out.append(Path(nodes, edges))
    return out
