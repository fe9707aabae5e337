"""Exact linear solvers for the hitting-probability systems.

``bareiss_solve`` is the dense fraction-free eliminator. ``sparse_solve``
eliminates on dictionaries of rationals with diagonal pivots chosen by a
Markowitz (minimum fill) rule; the systems built from chains are
nonsingular M-matrices, so every diagonal pivot stays nonzero.
"""

from __future__ import annotations

import heapq
import logging
from fractions import Fraction
from typing import Sequence

from .errors import SolverInvariantError

logger = logging.getLogger("bpwhile.solvers")


def bareiss_solve(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction]:
    """Solve ``matrix @ x = rhs`` over the integers without intermediate fractions.

    Rows are pivoted on the largest-magnitude entry of the current column.
    Every division in the elimination loop is exact.
    """
    n = len(matrix)
    rows = [list(map(int, row)) + [int(value)] for row, value in zip(matrix, rhs)]
    if len(rows) != n or any(len(row) != n + 1 for row in rows):
        raise ValueError("matrix must be square and match the right-hand side")
    previous = 1
    for k in range(n):
        pivot_row = max(range(k, n), key=lambda i: abs(rows[i][k]))
        if rows[pivot_row][k] == 0:
            raise SolverInvariantError(f"singular system at column {k}")
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
        pivot = rows[k][k]
        pivot_tail = rows[k]
        for i in range(k + 1, n):
            row = rows[i]
            factor = row[k]
            for j in range(k + 1, n + 1):
                row[j] = (pivot * row[j] - factor * pivot_tail[j]) // previous
            row[k] = 0
        previous = pivot

    solution = [Fraction(0)] * n
    for i in reversed(range(n)):
        row = rows[i]
        acc = Fraction(row[n])
        for j in range(i + 1, n):
            if row[j]:
                acc -= row[j] * solution[j]
        solution[i] = acc / row[i]
    return solution


def sparse_solve(rows: Sequence[dict[int, Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Solve a sparse system given as one ``{column: value}`` dict per row."""
    n = len(rows)
    work = [{j: Fraction(v) for j, v in row.items() if v} for row in rows]
    values = [Fraction(v) for v in rhs]
    columns: list[set[int]] = [set() for _ in range(n)]
    for i, row in enumerate(work):
        for j in row:
            columns[j].add(i)

    def cost(i: int) -> int:
        return (len(work[i]) - 1) * (len(columns[i]) - 1)

    heap = [(cost(i), i) for i in range(n)]
    heapq.heapify(heap)
    done = [False] * n
    order: list[int] = []
    while heap:
        stored, p = heapq.heappop(heap)
        if done[p]:
            continue
        current = cost(p)
        if current != stored:
            heapq.heappush(heap, (current, p))
            continue
        pivot_row = work[p]
        pivot = pivot_row.get(p)
        if not pivot:
            raise SolverInvariantError(f"zero diagonal pivot at row {p}")
        touched = [i for i in columns[p] if i != p]
        for i in touched:
            row = work[i]
            factor = row.pop(p) / pivot
            for j, v in pivot_row.items():
                if j == p:
                    continue
                updated = row.get(j, 0) - factor * v
                if updated:
                    row[j] = updated
                    columns[j].add(i)
                else:
                    row.pop(j, None)
                    columns[j].discard(i)
            values[i] -= factor * values[p]
        for j in pivot_row:
            columns[j].discard(p)
        columns[p].clear()
        done[p] = True
        order.append(p)
        for i in touched:
            heapq.heappush(heap, (cost(i), i))

    logger.debug("sparse elimination: %s unknowns, %s nonzeros after fill-in", n, sum(len(row) for row in work))
    solution = [Fraction(0)] * n
    for p in reversed(order):
        row = work[p]
        acc = values[p]
        for j, v in row.items():
            if j != p:
                acc -= v * solution[j]
        solution[p] = acc / row[p]
    return solution
