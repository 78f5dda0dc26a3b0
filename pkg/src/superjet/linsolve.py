"""Sparse exact linear solving over QQ, and its lift to QQ[params].

Ansatz problems are linear in unknown rational numbers once every
coefficient in QQ[params] is expanded into parameter monomials, so the only
elimination needed is over QQ. Rows are dicts ``column -> mpq`` and pivots are
kept in creation order, which makes the incremental reduction terminate.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from gmpy2 import mpq
from sympy import QQ

from .errors import NoSolution


@dataclass
class SparseSystem:
    n_unknowns: int
    rows: list[tuple[dict, object]] = field(default_factory=list)

    def add(self, row: dict, rhs=0) -> None:
        row = {j: mpq(v) for j, v in row.items() if v}
        rhs = mpq(rhs)
        if row or rhs:
            self.rows.append((row, rhs))


@dataclass
class Solution:
    values: list
    free: list[int]

    @property
    def nullity(self) -> int:
        return len(self.free)


def solve(system: SparseSystem) -> Solution:
    """One particular solution (free unknowns set to zero) plus the free columns."""
    pivots: dict[int, tuple[int, dict, object]] = {}
    order = 0
    for row, rhs in sorted(system.rows, key=lambda r: len(r[0])):
        row = dict(row)
        heap = [pivots[c][0] for c in row if c in pivots]
        heapq.heapify(heap)
        by_rank = {v[0]: c for c, v in pivots.items()}
        seen = set()
        while heap:
            rank = heapq.heappop(heap)
            if rank in seen:
                continue
            seen.add(rank)
            c = by_rank[rank]
            a = row.get(c)
            if not a:
                continue
            _, prow, prhs = pivots[c]
            for j, v in prow.items():
                w = row.get(j, 0) - a * v
                if w:
                    row[j] = w
                    if j in pivots and pivots[j][0] not in seen:
                        heapq.heappush(heap, pivots[j][0])
                else:
                    row.pop(j, None)
            rhs = rhs - a * prhs
        if not row:
            if rhs:
                raise NoSolution("inconsistent linear system")
            continue
        c = min(row)
        inv = 1 / row[c]
        pivots[c] = (order, {j: v * inv for j, v in row.items()}, rhs * inv)
        order += 1
    values = [mpq(0)] * system.n_unknowns
    for c, (_, prow, prhs) in sorted(pivots.items(), key=lambda kv: -kv[1][0]):
        x = prhs
        for j, v in prow.items():
            if j != c:
                x -= v * values[j]
        values[c] = x
    free = [j for j in range(system.n_unknowns) if j not in pivots]
    return Solution(values, free)


def expand_coeff(c, K) -> dict:
    """Split a coefficient in QQ[params] into {exponent tuple: rational}."""
    if K is QQ:
        return {(): mpq(c)} if c else {}
    return {e: mpq(v) for e, v in c.terms()}


def mono_coeff(K, exps: tuple):
    """The ring element prod(params ** exps)."""
    if K is QQ:
        return mpq(1)
    out = K.one
    for g, e in zip(K.gens, exps):
        if e:
            out = out * g ** e
    return out


def param_monomials(nparams: int, max_degree: int) -> list[tuple]:
    if nparams == 0:
        return [()]
    out = []

    def rec(prefix, remaining, left):
        if left == 1:
            for e in range(remaining + 1):
                out.append(prefix + (e,))
            return
        for e in range(remaining + 1):
            rec(prefix + (e,), remaining - e, left - 1)

    rec((), max_degree, nparams)
    return sorted(out, key=lambda t: (sum(t), t))
