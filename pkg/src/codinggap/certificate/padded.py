"""Finite metrics, CKR padded decompositions and the pairwise-to-all-pairs
selection built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..rng import derive_seed, generator

MAX_POINTS = 2000
PAIRWISE_RETRIES = 256
# radius window of the decomposition, [Δ/4, Δ/2]; padding is meaningful for γ ≤ 1/8
GAMMA_MAX = Fraction(1, 8)


class MetricError(ValueError):
    pass


class Metric:
    """A finite metric given by its full distance matrix; checked exactly once."""

    def __init__(self, dist: Sequence[Sequence[float]] | np.ndarray, labels: Sequence[object] | None = None):
        D = np.asarray(dist, dtype=float)
        n = D.shape[0]
        if D.ndim != 2 or D.shape != (n, n):
            raise MetricError("distance matrix must be square")
        if n > MAX_POINTS:
            raise MetricError(f"at most {MAX_POINTS} points supported")
        if np.any(np.isnan(D)) or np.any(D < 0):
            raise MetricError("distances must be nonnegative numbers")
        if np.any(np.diag(D) != 0):
            raise MetricError("d(x, x) must be 0")
        if not np.array_equal(D, D.T):
            raise MetricError("distance matrix must be symmetric")
        for k in range(n):
            viol = D > D[:, k : k + 1] + D[k : k + 1, :]
            if viol.any():
                i, j = map(int, np.argwhere(viol)[0])
                raise MetricError(f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})")
        self.D = D
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise MetricError("one label per point required")

    @property
    def n(self) -> int:
        return self.D.shape[0]

    def __call__(self, x: int, y: int) -> float:
        return float(self.D[x, y])


@dataclass(frozen=True)
class PaddedPartition:
    assignment: np.ndarray  # point -> part id (the part's center)
    delta: float
    radius: float
    beta: int

    @property
    def parts(self) -> tuple[tuple[int, ...], ...]:
        groups: dict[int, list[int]] = {}
        for x, c in enumerate(self.assignment.tolist()):
            groups.setdefault(c, []).append(x)
        return tuple(tuple(v) for _, v in sorted(groups.items()))

    def padded(self, metric: Metric, x: int, rho: float) -> bool:
        """Whether the closed ball B(x, rho) lies inside x's part."""
        ball = metric.D[x] <= rho
        return bool(np.all(self.assignment[ball] == self.assignment[x]))

    def padded_mask(self, metric: Metric, rho: float) -> np.ndarray:
        same = self.assignment[None, :] == self.assignment[:, None]
        return np.all(same | (metric.D > rho), axis=1)

    def weak_diameters(self, metric: Metric) -> list[float]:
        return [float(metric.D[np.ix_(p, p)].max()) for p in self.parts]


def padding_beta(k: int) -> int:
    """The padding constant used with k pairs: max(1, ⌈8 ln k⌉)."""
    return max(1, math.ceil(8 * math.log(k))) if k > 1 else 1


def padded_decomposition(metric: Metric, delta: float, seed: int = 0) -> PaddedPartition:
    """CKR partition: one radius R ~ U[Δ/4, Δ/2] and a uniformly random order
    of centers; each point joins the first center within distance R.

    Parts have weak diameter ≤ 2R ≤ Δ.  Δ = 0 yields the classes of points
    at distance zero.
    """
    if delta < 0:
        raise ValueError("Δ must be nonnegative")
    rng = generator(seed, "ckr")
    R = float(rng.uniform(delta / 4, delta / 2)) if delta > 0 else 0.0
    order = rng.permutation(metric.n)
    within = metric.D[order] <= R  # within[c, x]: center order[c] covers x
    first = np.argmax(within, axis=0)
    assignment = order[first]
    return PaddedPartition(assignment, float(delta), R, padding_beta(metric.n))


class SelectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class PairwiseResult:
    indices: tuple[int, ...]
    beta: int
    threshold: Fraction  # (T-1)/(2β); every kept cross distance exceeds it
    min_cross: float
    attempts: int


def pairwise_to_allpairs(
    metric: Metric,
    pairs: Sequence[tuple[int, int]],
    T: int,
    seed: int = 0,
    weights: Sequence[int] | None = None,
) -> PairwiseResult:
    """From pairs with d(s_i, t_i) ≥ T, keep a weighted ≥1/9 share with every
    cross distance d(s_i, t_j) > (T-1)/(2β).

    A pair survives when s_i is γΔ-padded (Δ = T-1, γ = 1/(2β)) and a fair
    coin per part puts s_i's part on the source side and t_i's on the sink
    side.  Retries with derived seeds until the share reaches 1/9.
    """
    if not pairs:
        raise SelectionError("no pairs given")
    w = [1] * len(pairs) if weights is None else [int(x) for x in weights]
    if len(w) != len(pairs) or any(x < 1 for x in w):
        raise ValueError("weights must be positive integers, one per pair")
    for i, (s, t) in enumerate(pairs):
        if metric(s, t) < T:
            raise SelectionError(f"pair {i}: d(s, t) = {metric(s, t)} < T = {T}")
    beta = padding_beta(len(pairs))
    delta = T - 1
    threshold = Fraction(delta, 2 * beta)
    rho = float(threshold)
    total = sum(w)
    src = np.array([s for s, _ in pairs])
    dst = np.array([t for _, t in pairs])
    for attempt in range(PAIRWISE_RETRIES):
        part = padded_decomposition(metric, delta, derive_seed(seed, "pairwise", attempt))
        coins = generator(seed, "coins", attempt).integers(0, 2, size=metric.n)
        padded = part.padded_mask(metric, rho)
        keep = padded[src] & (coins[part.assignment[src]] == 1) & (coins[part.assignment[dst]] == 0)
        chosen = [i for i in range(len(pairs)) if keep[i]]
        if not chosen or 9 * sum(w[i] for i in chosen) < total:
            continue
        cross = metric.D[np.ix_(src[chosen], dst[chosen])]
        min_cross = float(cross.min())
        if not min_cross > rho:
            raise SelectionError(f"cross distance {min_cross} not above (T-1)/(2β) = {threshold}")
        return PairwiseResult(tuple(chosen), beta, threshold, min_cross, attempt + 1)
    raise SelectionError(f"no selection of weight >= 1/9 after {PAIRWISE_RETRIES} attempts")
