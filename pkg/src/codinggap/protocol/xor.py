"""The three-round XOR protocol on the star family."""

from __future__ import annotations

from ..gaps.base import hub_edge, private_path_edges
from .trace import ProtocolTrace, Transmission


def xor_star_protocol(k: int) -> ProtocolTrace:
    """Round 1: s_i sends m_i to S and onto each private path toward t_j.
    Round 2: S sends the XOR of all m_i to T while the paths advance.
    Round 3: T sends the XOR to every t_j and the paths deliver.
    Sink t_j cancels the k-1 path messages out of the XOR to recover m_j.

    Edge ids follow ``base_instance(k)``; every edge is traversed u->v (dir 0).
    """
    if k < 2:
        raise ValueError("the star protocol needs k >= 2")
    everything = (1 << k) - 1
    rounds: list[list[Transmission]] = [[], [], []]
    for i in range(1, k + 1):
        bit = 1 << (i - 1)
        rounds[0].append(Transmission(i - 1, 0, coeffs=bit))
        for j in range(1, k + 1):
            if j == i:
                continue
            path = private_path_edges(k, i, j)
            for h in range(3):
                rounds[h].append(Transmission(path[h], 0, coeffs=bit))
    rounds[1].append(Transmission(hub_edge(k), 0, coeffs=everything))
    for j in range(1, k + 1):
        rounds[2].append(Transmission(k + j, 0, coeffs=everything))
    return ProtocolTrace(tuple(tuple(r) for r in rounds))
