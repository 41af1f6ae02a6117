"""Exact optimum of the hop-bounded concurrent-flow LP on small instances.

P_i(T) is enumerated explicitly and the resulting LP

    max z  s.t.  d_i z - Σ_p f_i(p) ≤ 0            (one row per session)
                 Σ_{p∋e} f_i(p)      ≤ T c_e        (one row per edge)

is solved by a revised simplex over Fractions.  The slack basis is feasible
at the start, so no phase one is needed.  Pricing is Dantzig's rule until a
run of degenerate pivots, then Bland's rule, which cannot cycle.  The optimal
row duals are exactly (h, ℓ) of the cut LP.
"""

from __future__ import annotations

from fractions import Fraction

from ..instance import Path, UnicastInstance
from .paths import PathLimitExceeded, enumerate_paths
from .solution import Duals, FlowSolution, PathFlow, hop_infeasible_solution

DEFAULT_PATH_LIMIT = 100_000
_DEGENERATE_RUN = 50


class ExactSolveError(RuntimeError):
    pass


def solve_exact(instance: UnicastInstance, T: int, path_limit: int = DEFAULT_PATH_LIMIT) -> FlowSolution:
    if T < 1:
        raise ValueError("hop bound T must be >= 1")
    active = [i for i, s in enumerate(instance.sessions) if s.source != s.sink]
    columns: list[tuple[int, Path]] = []
    try:
        for i in active:
            s = instance.sessions[i]
            budget = path_limit - len(columns)
            found = list(enumerate_paths(instance, s.source, s.sink, T, limit=budget))
            if not found:
                return hop_infeasible_solution(instance, T, Fraction(0), i, "exact")
            columns += [(i, p) for p in found]
    except PathLimitExceeded as exc:
        raise ExactSolveError(f"{exc}; use solve_mwu for this instance") from exc
    if not active:
        lengths = {eid: Fraction(0) for eid in range(len(instance.edges))}
        h = tuple(Fraction(0) for _ in instance.sessions)
        return FlowSolution(Fraction(1), T, Fraction(0), (), Duals(lengths, h), method="exact")

    lp = _PathLP(instance, T, active, columns)
    lp.solve()
    z, path_values = lp.primal()
    y = lp.duals()
    h = [Fraction(0)] * instance.k
    for r, i in enumerate(active):
        h[i] = y[r]
    lengths = {eid: y[len(active) + eid] for eid in range(len(instance.edges))}
    flows = tuple(
        PathFlow(i, p, v) for (i, p), v in zip(columns, path_values) if v > 0
    )
    return FlowSolution(z, T, Fraction(0), flows, Duals(lengths, tuple(h)), method="exact")


class _PathLP:
    """Column layout: 0 is z, 1..P are path flows, then one slack per row."""

    def __init__(self, instance: UnicastInstance, T: int, active: list[int], columns: list[tuple[int, Path]]):
        self.k = len(active)
        self.nrows = self.k + len(instance.edges)
        row_of = {i: r for r, i in enumerate(active)}
        self.demand = [Fraction(instance.sessions[i].demand) for i in active]
        self.col_session = [row_of[i] for i, _ in columns]
        self.col_edges = [tuple(self.k + e for e in p.edges) for _, p in columns]
        self.P = len(columns)
        self.b = [Fraction(0)] * self.k + [Fraction(T * e.capacity) for e in instance.edges]
        n = self.nrows
        self.basis = [1 + self.P + r for r in range(n)]
        self.Binv = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
        self.xB = list(self.b)

    def column(self, j: int) -> dict[int, Fraction]:
        if j == 0:
            return {r: self.demand[r] for r in range(self.k)}
        if j <= self.P:
            col = {self.col_session[j - 1]: Fraction(-1)}
            for r in self.col_edges[j - 1]:
                col[r] = col.get(r, Fraction(0)) + 1
            return col
        return {j - 1 - self.P: Fraction(1)}

    def duals(self) -> list[Fraction]:
        # y = c_B B^{-1}; only z has nonzero cost
        for r, j in enumerate(self.basis):
            if j == 0:
                return list(self.Binv[r])
        return [Fraction(0)] * self.nrows

    def reduced_costs(self, y: list[Fraction]):
        yield 0, 1 - sum((self.demand[r] * y[r] for r in range(self.k)), Fraction(0))
        for j in range(self.P):
            yield j + 1, y[self.col_session[j]] - sum((y[r] for r in self.col_edges[j]), Fraction(0))
        for r in range(self.nrows):
            yield 1 + self.P + r, -y[r]

    def solve(self) -> None:
        bland = False
        degenerate_run = 0
        n = self.nrows
        while True:
            in_basis = set(self.basis)
            y = self.duals()
            enter, best = None, Fraction(0)
            for j, d in self.reduced_costs(y):
                if d > 0 and j not in in_basis:
                    if bland:
                        enter = j
                        break
                    if d > best:
                        enter, best = j, d
            if enter is None:
                return
            col = self.column(enter)
            u = [sum((self.Binv[r][c] * v for c, v in col.items()), Fraction(0)) for r in range(n)]
            leave, ratio = None, None
            for r in range(n):
                if u[r] > 0:
                    q = self.xB[r] / u[r]
                    if ratio is None or q < ratio or (q == ratio and self.basis[r] < self.basis[leave]):
                        leave, ratio = r, q
            if leave is None:
                raise ExactSolveError("LP unbounded; the path LP is always bounded, so this is a bug")
            if ratio == 0:
                degenerate_run += 1
                if degenerate_run > _DEGENERATE_RUN:
                    bland = True
            else:
                degenerate_run = 0
            self._pivot(leave, enter, u)

    def _pivot(self, leave: int, enter: int, u: list[Fraction]) -> None:
        piv = u[leave]
        prow = [x / piv for x in self.Binv[leave]]
        px = self.xB[leave] / piv
        for r in range(self.nrows):
            if r == leave or u[r] == 0:
                continue
            f = u[r]
            row = self.Binv[r]
            self.Binv[r] = [a - f * b if b else a for a, b in zip(row, prow)]
            self.xB[r] -= f * px
        self.Binv[leave] = prow
        self.xB[leave] = px
        self.basis[leave] = enter

    def primal(self) -> tuple[Fraction, list[Fraction]]:
        z = Fraction(0)
        values = [Fraction(0)] * self.P
        for r, j in enumerate(self.basis):
            if j == 0:
                z = self.xB[r]
            elif j <= self.P:
                values[j - 1] = self.xB[r]
        return z, values
