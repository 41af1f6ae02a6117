"""Analytic parameter tracker for the iterated product family I(i, r).

Level i+1 at r is the product of I(i, 3r) (outer) with I(i, u(i, 3r))
(inner).  Exact quantities: a = 3^(2^i), b = 5^(2^i), gap = b/a.  Upper
bounds, iterated in log space with mpmath:

    u(0, r) = m(0, r) = 3r² - r + 1             (the base edge count)
    u(i+1, r) ≤ 3^(2^i) · u(i, u(i, 3r))
    m(i+1, r) ≤ a₂ · max(n₁, n₂) · m₁ · m₂

where max(n₁, n₂) is taken from this package's colored bipartite size bound
(SIZE_BASE·M·K)^(g/2 + SIZE_OFFSET) with M = 2(m₁ - f₁) ≤ 2m₁, K = k₂ ≤ m₂
and g = 2b₁b₂, so the O(·) constants are concrete.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .base import base_edge_count

SIZE_BASE = 9
SIZE_OFFSET = 3
PRECISION = 60  # mpmath working precision in decimal digits
CSV_HEADER = ("i", "r", "a", "b", "gap", "log_u_bound", "log_m_bound")


@dataclass(frozen=True)
class RecurrenceRecord:
    i: int
    r: int
    a: int
    b: int
    gap: Fraction
    log_u_bound: mpmath.mpf
    log_m_bound: mpmath.mpf

    @property
    def gap_exponent(self) -> mpmath.mpf:
        """c with gap = (log m)^c; as k ≤ m this lower-bounds the exponent in
        gap ≥ (log k)^c.  Undefined (nan) while log log m ≤ 0."""
        with mpmath.workdps(PRECISION):
            ll = mpmath.log(self.log_m_bound)
            if ll <= 0:
                return mpmath.nan
            return mpmath.log(mpmath.mpf(self.gap.numerator) / self.gap.denominator) / ll

    def row(self) -> list[str]:
        return [
            str(self.i),
            str(self.r),
            str(self.a),
            str(self.b),
            f"{self.gap.numerator}/{self.gap.denominator}",
            mpmath.nstr(self.log_u_bound, 15),
            mpmath.nstr(self.log_m_bound, 15),
        ]


def _base_log(r: mpmath.mpf) -> mpmath.mpf:
    return mpmath.log(3 * r * r - r + 1)


@lru_cache(maxsize=None)
def _log_u(i: int, r: mpmath.mpf) -> mpmath.mpf:
    if i == 0:
        return _base_log(r)
    u1 = mpmath.exp(_log_u(i - 1, 3 * r))
    return (2 ** (i - 1)) * mpmath.log(3) + _log_u(i - 1, u1)


@lru_cache(maxsize=None)
def _log_m(i: int, r: mpmath.mpf) -> mpmath.mpf:
    if i == 0:
        return _base_log(r)
    u1 = mpmath.exp(_log_u(i - 1, 3 * r))
    lm1 = _log_m(i - 1, 3 * r)
    lm2 = _log_m(i - 1, u1)
    bb = mpmath.mpf(5) ** (2**i)  # b₁·b₂ = (5^(2^(i-1)))²
    log_n = (bb + SIZE_OFFSET) * (mpmath.log(2 * SIZE_BASE) + lm1 + lm2)
    return (2 ** (i - 1)) * mpmath.log(3) + log_n + lm1 + lm2


def recurrence_tracker(i: int, r: int) -> RecurrenceRecord:
    if i < 0:
        raise ValueError("i must be >= 0")
    if r < 5:
        raise ValueError("r must be >= 5")
    a, b = 3 ** (2**i), 5 ** (2**i)
    with mpmath.workdps(PRECISION):
        R = mpmath.mpf(r)
        lu, lm = _log_u(i, R), _log_m(i, R)
    if i == 0:
        assert int(mpmath.nint(mpmath.exp(lm))) == base_edge_count(r)
    return RecurrenceRecord(i, r, a, b, Fraction(b, a), lu, lm)


def recurrence_table(max_level: int, r: int) -> list[RecurrenceRecord]:
    return [recurrence_tracker(i, r) for i in range(max_level + 1)]


def recurrence_csv(records: list[RecurrenceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def fitted_ratio_constant(records: list[RecurrenceRecord], fit_levels: int = 2) -> mpmath.mpf:
    """Smallest C with log m(i+1)/log m(i) ≤ C^(2^i) on the first fit_levels steps."""
    best = mpmath.mpf(0)
    for lo, hi in zip(records[:fit_levels], records[1 : fit_levels + 1]):
        best = max(best, (hi.log_m_bound / lo.log_m_bound) ** (mpmath.mpf(1) / 2**lo.i))
    return best
