"""Composition of an outer and an inner coding protocol on a product instance."""

from __future__ import annotations

from ..gaps.product import ProductWiring
from ..instance import GapInstance
from .trace import ProtocolTrace, Transmission


class CompositionError(ValueError):
    pass


def compose_product_protocol(
    outer: ProtocolTrace, inner: ProtocolTrace, prod: GapInstance, wiring: ProductWiring | None
) -> ProtocolTrace:
    """Expand every outer round into a2 product rounds.

    Each outer copy runs the outer protocol on its own bits (copy i owns bits
    i·k1 .. i·k1 + k1 - 1).  A transmission on an outer cut edge walks the
    a2-hop replacement path, one hop per product round.  A transmission on a
    non-cut arc becomes the payload of the inner session that replaced it;
    each inner copy then runs the inner protocol once, mapping inner unit
    vector e_b to the payload p_b of its session b (zero when b idles).
    """
    if wiring is None:
        raise CompositionError("composition needs the product wiring")
    for tr in (outer, inner):
        if tr.is_routing and tr.length:
            raise CompositionError("compose expects coding traces; convert routing traces first")
    a2 = wiring.a2
    if inner.length > a2:
        raise CompositionError(f"inner trace has {inner.length} rounds, more than a2 = {a2}")
    k1 = wiring.outer_sessions
    merge_for = wiring.merge_for()
    cut_for = wiring.cut_path_for()
    arc_index = {(a.edge, a.direction): idx for idx, a in enumerate(wiring.arcs)}
    cut_edges = {c.outer_edge for c in wiring.cut_paths}
    rounds: list[list[Transmission]] = [[] for _ in range(outer.length * a2)]

    for r, rnd in enumerate(outer.rounds):
        base = r * a2
        payload: dict[int, dict[int, int]] = {}
        for t in rnd:
            assert t.coeffs is not None
            for i in range(wiring.n1):
                vec = t.coeffs << (i * k1)
                if not vec:
                    continue
                if t.edge in cut_edges:
                    rec = cut_for[(i, t.edge)]
                    hops = rec.edges if t.direction == 0 else tuple(reversed(rec.edges))
                    for h, eid in enumerate(hops):
                        rounds[base + h].append(Transmission(eid, t.direction, coeffs=vec))
                    continue
                key = (t.edge, t.direction)
                if key not in arc_index:
                    raise CompositionError(f"outer transmission on unknown edge {t.edge}")
                m = merge_for.get((i, arc_index[key]))
                if m is None:
                    raise CompositionError(f"wiring has no merge for copy {i}, arc {arc_index[key]}")
                payload.setdefault(m.inner_copy, {})[m.inner_session] = vec
        for j in sorted(payload):
            loads = payload[j]
            offset = wiring.inner_edge_offsets[j]
            for h, irnd in enumerate(inner.rounds):
                for it in irnd:
                    assert it.coeffs is not None
                    vec, c, b = 0, it.coeffs, 0
                    while c:
                        if c & 1:
                            vec ^= loads.get(b, 0)
                        c >>= 1
                        b += 1
                    if vec:
                        rounds[base + h].append(Transmission(offset + it.edge, it.direction, coeffs=vec))
    while rounds and not rounds[-1]:
        rounds.pop()
    return ProtocolTrace(tuple(tuple(r) for r in rounds))
