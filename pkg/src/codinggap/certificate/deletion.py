"""Lower bounds from deleting a small edge set that pushes terminals apart."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ..instance import GapInstance, UnicastInstance, hop_distances_from


class PremiseError(ValueError):
    """A distance premise of a deletion bound does not hold."""


@dataclass(frozen=True)
class DeletionBound:
    value: Fraction
    T: int
    cut: frozenset[int]
    min_distance: int | float  # smallest premise distance actually observed

    def __float__(self) -> float:
        return float(self.value)


def _require_simple(instance: UnicastInstance) -> None:
    if any(e.capacity != 1 for e in instance.edges) or any(s.demand != 1 for s in instance.sessions):
        raise PremiseError("deletion bounds need unit capacities and unit demands")


def _bound(k: int, F: frozenset[int], T: int) -> Fraction:
    return Fraction(T) if not F else min(Fraction(T), Fraction(k, len(F)))


def deletion_routing_lb(
    target: GapInstance | UnicastInstance, F: Iterable[int] | None = None, T: int | None = None
) -> DeletionBound:
    """min{T, k/|F|} for routing, given dist_{G-F}(s_i, t_i) ≥ T for every i.

    A gap instance supplies F = its cut edges and T = its b by default.
    """
    if isinstance(target, GapInstance):
        instance = target.instance
        F = target.cut_edges if F is None else F
        T = target.params.b if T is None else T
    else:
        instance = target
    if F is None or T is None:
        raise ValueError("need F and T")
    cut = frozenset(F)
    _require_simple(instance)
    low: int | float = math.inf
    for i, s in enumerate(instance.sessions):
        d = hop_distances_from(instance, s.source, cut).get(s.sink, math.inf)
        if d < T:
            raise PremiseError(f"session {i}: dist(s_{i}, t_{i}) = {d} < T = {T} after deleting F")
        low = min(low, d)
    return DeletionBound(_bound(instance.k, cut, T), T, cut, low)


def deletion_coding_lb(instance: UnicastInstance, F: Iterable[int], T: int) -> DeletionBound:
    """min{T, k/|F|} for coding, given dist_{G-F}(s_i, t_j) ≥ T for ALL i, j."""
    cut = frozenset(F)
    _require_simple(instance)
    low: int | float = math.inf
    for i, s in enumerate(instance.sessions):
        dist = hop_distances_from(instance, s.source, cut)
        for j, t in enumerate(instance.sessions):
            d = dist.get(t.sink, math.inf)
            if d < T:
                raise PremiseError(f"pair (s_{i}, t_{j}): distance {d} < T = {T} after deleting F")
            low = min(low, d)
    return DeletionBound(_bound(instance.k, cut, T), T, cut, low)
