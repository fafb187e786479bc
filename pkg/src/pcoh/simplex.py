"""Exact rational two-phase simplex with Bland's anti-cycling rule.

Solves ``max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`` over
:class:`fractions.Fraction`. Problems here are tiny (a handful of rows), so
a dense tableau is the simplest thing that works.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass
class LPResult:
    status: str
    value: Optional[Fraction] = None
    x: List[Fraction] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(rows, obj, basis, r, j):
    piv = rows[r][j]
    rows[r] = [v / piv for v in rows[r]]
    pr = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[j]:
            f = row[j]
            rows[i] = [a - f * b for a, b in zip(row, pr)]
    if obj[j]:
        f = obj[j]
        obj[:] = [a - f * b for a, b in zip(obj, pr)]
    basis[r] = j


def _run(rows, obj, basis, allowed) -> str:
    """Iterate to optimality. ``obj`` holds reduced costs (negative = improving)."""
    while True:
        entering = next((j for j in allowed if obj[j] < 0), None)
        if entering is None:
            return OPTIMAL
        best = None
        for i, row in enumerate(rows):
            a = row[entering]
            if a > 0:
                ratio = row[-1] / a
                cand = (ratio, basis[i])
                if best is None or cand < best[0]:
                    best = (cand, i)
        if best is None:
            return UNBOUNDED
        _pivot(rows, obj, basis, best[1], entering)


def _objective_row(cost, rows, basis, width):
    obj = [-c for c in cost] + [Fraction(0)]
    obj += [Fraction(0)] * (width + 1 - len(obj))
    for i, b in enumerate(basis):
        cb = cost[b] if b < len(cost) else 0
        if cb:
            obj = [o + cb * v for o, v in zip(obj, rows[i])]
    return obj


def solve(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
          A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LPResult:
    n = len(c)
    c = [Fraction(v) for v in c]
    m_ub, m_eq = len(A_ub), len(A_eq)
    n_slack = m_ub
    needs_art = []
    raw = []
    for i in range(m_ub):
        row = [Fraction(v) for v in A_ub[i]] + [Fraction(0)] * n_slack
        row[n + i] = Fraction(1)
        rhs = Fraction(b_ub[i])
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            needs_art.append(True)
        else:
            needs_art.append(False)
        raw.append((row, rhs))
    for i in range(m_eq):
        row = [Fraction(v) for v in A_eq[i]] + [Fraction(0)] * n_slack
        rhs = Fraction(b_eq[i])
        if rhs < 0:
            row, rhs = [-v for v in row], -rhs
        needs_art.append(True)
        raw.append((row, rhs))

    n_art = sum(needs_art)
    width = n + n_slack + n_art
    rows, basis = [], []
    k = 0
    for i, (row, rhs) in enumerate(raw):
        art = [Fraction(0)] * n_art
        if needs_art[i]:
            art[k] = Fraction(1)
            basis.append(n + n_slack + k)
            k += 1
        else:
            basis.append(n + i)
        rows.append(row + art + [rhs])

    if n_art:
        phase1 = [Fraction(0)] * (n + n_slack) + [Fraction(-1)] * n_art
        obj = _objective_row(phase1, rows, basis, width)
        _run(rows, obj, basis, range(width))
        if obj[-1] != 0:
            return LPResult(INFEASIBLE)
        # drive zero-level artificials out of the basis
        for r in range(len(rows) - 1, -1, -1):
            if basis[r] >= n + n_slack:
                j = next((j for j in range(n + n_slack) if rows[r][j] != 0), None)
                if j is None:
                    del rows[r]
                    del basis[r]
                else:
                    _pivot(rows, obj, basis, r, j)
        rows = [row[:n + n_slack] + [row[-1]] for row in rows]
        width = n + n_slack

    cost = c + [Fraction(0)] * n_slack
    obj = _objective_row(cost, rows, basis, width)
    status = _run(rows, obj, basis, range(width))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * width
    for i, b in enumerate(basis):
        x[b] = rows[i][-1]
    return LPResult(OPTIMAL, obj[-1], x[:n])


def feasible(A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = (), n: Optional[int] = None) -> Optional[List[Fraction]]:
    """Return a feasible point or ``None``."""
    if n is None:
        n = len(A_ub[0]) if A_ub else len(A_eq[0])
    res = solve([0] * n, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.optimal else None


def solve_square(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[List[Fraction]]:
    """Gauss-Jordan on a square rational system; ``None`` when singular."""
    size = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][-1] for r in range(size)]
