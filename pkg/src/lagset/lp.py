"""Exact linear programming by the revised simplex method with Bland's rule.

Every LP solved in this package has very few equality rows (the state
dimension, plus one) and possibly many columns, so the solver keeps the
basis inverse explicitly and prices columns one at a time.  Bland's rule
(smallest eligible index enters, smallest basic index leaves on ties)
guarantees termination on the highly degenerate problems produced by
polytopes with many coincident facets.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = ["LPResult", "simplex", "maximize", "in_cone", "is_bounded", "interior_point"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    value: object = None
    y: tuple | None = None
    duals: tuple | None = None
    iterations: int = 0


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def simplex(cost: Sequence, columns: Sequence[Sequence], rhs: Sequence,
            max_iter: int = 100_000) -> LPResult:
    """Minimize ``cost . y`` subject to ``sum_j y_j columns[j] = rhs``, ``y >= 0``.

    Returns the optimal ``y``, the objective value and the simplex
    multipliers ``duals`` (one per equality row) satisfying
    ``duals . columns[j] <= cost[j]`` for every column at optimality.
    """
    r = len(rhs)
    n = len(columns)
    flip = [(-1 if _frac(b) < 0 else 1) for b in rhs]
    cols = [tuple(_frac(c[i]) * flip[i] for i in range(r)) for c in columns]
    b = [abs(_frac(v)) for v in rhs]
    cost = [_frac(c) for c in cost]

    # artificial variable i has index n + i and column e_i
    basis = [n + i for i in range(r)]
    binv = [[Fraction(int(i == k)) for k in range(r)] for i in range(r)]
    xb = list(b)
    iters = 0

    def column(j):
        if j >= n:
            e = [Fraction(0)] * r
            e[j - n] = Fraction(1)
            return e
        return cols[j]

    def run(costs_of, allow):
        nonlocal iters
        while True:
            cb = [costs_of(j) for j in basis]
            pi = [sum(cb[i] * binv[i][k] for i in range(r) if cb[i]) for k in range(r)]
            entering = None
            inbasis = set(basis)
            for j in range(n + r):
                if j in inbasis or not allow(j):
                    continue
                col = column(j)
                d = costs_of(j) - sum(p * c for p, c in zip(pi, col) if p and c)
                if d < 0:
                    entering = j
                    break
            if entering is None:
                return pi, OPTIMAL
            col = column(entering)
            w = [sum(binv[i][k] * col[k] for k in range(r) if col[k]) for i in range(r)]
            leave = None
            best = None
            for i in range(r):
                if w[i] > 0:
                    ratio = xb[i] / w[i]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return pi, UNBOUNDED
            _pivot(binv, xb, w, leave)
            basis[leave] = entering
            iters += 1
            if iters > max_iter:
                raise RuntimeError("simplex iteration limit exceeded")

    def phase1_cost(j):
        return Fraction(1) if j >= n else Fraction(0)

    run(phase1_cost, lambda j: True)
    if sum(xb[i] for i in range(r) if basis[i] >= n) > 0:
        return LPResult(INFEASIBLE, iterations=iters)

    # drive zero-valued artificials out of the basis where possible
    for i in range(r):
        if basis[i] < n:
            continue
        inbasis = set(basis)
        for j in range(n):
            if j in inbasis:
                continue
            col = cols[j]
            wi = sum(binv[i][k] * col[k] for k in range(r) if col[k])
            if wi != 0:
                w = [sum(binv[t][k] * col[k] for k in range(r) if col[k]) for t in range(r)]
                _pivot(binv, xb, w, i)
                basis[i] = j
                break

    def phase2_cost(j):
        return cost[j] if j < n else Fraction(0)

    pi, status = run(phase2_cost, lambda j: j < n)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=iters)
    y = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            y[j] = xb[i]
    value = sum(cost[j] * y[j] for j in range(n))
    duals = tuple(pi[k] * flip[k] for k in range(r))
    return LPResult(OPTIMAL, value, tuple(y), duals, iters)


def _pivot(binv, xb, w, leave):
    r = len(xb)
    p = w[leave]
    row = [v / p for v in binv[leave]]
    binv[leave] = row
    xb[leave] = xb[leave] / p
    for i in range(r):
        if i != leave and w[i] != 0:
            f = w[i]
            bi = binv[i]
            for k in range(r):
                if row[k]:
                    bi[k] -= f * row[k]
            xb[i] -= f * xb[leave]


def maximize(objective: Sequence, rows: Sequence[Sequence], rhs: Sequence) -> LPResult:
    """Maximize ``objective . x`` over ``rows x <= rhs`` with ``x`` free.

    Solved through the dual ``min rhs . y : rows^T y = objective, y >= 0``;
    the primal optimizer is returned in ``duals``.  Status ``"unbounded"``
    means the dual is unbounded, i.e. the primal is infeasible; status
    ``"infeasible"`` means the dual is infeasible, i.e. the primal is
    unbounded or infeasible.
    """
    res = simplex(rhs, rows, objective)
    return res


def in_cone(vec: Sequence, generators: Sequence[Sequence]) -> bool:
    """True iff ``vec`` is a non-negative combination of ``generators``."""
    if not generators:
        return all(v == 0 for v in vec)
    res = simplex([0] * len(generators), generators, vec)
    return res.status == OPTIMAL


def is_bounded(normals: Sequence[Sequence]) -> bool:
    """A non-empty ``{x : a_j x <= b_j}`` is bounded iff the normals span
    every direction positively."""
    if not normals:
        return False
    m = len(normals[0])
    for k in range(m):
        for s in (1, -1):
            e = [0] * m
            e[k] = s
            if not in_cone(e, normals):
                return False
    return True


def interior_point(rows: Sequence[Sequence], rhs: Sequence):
    """Deepest point in the l1 sense, capped at depth one.

    Returns ``(depth, x)``: ``depth > 0`` means ``x`` is strictly interior,
    ``depth == 0`` means the set is non-empty but has empty interior; the
    result is ``None`` for an empty set.
    """
    m = len(rows[0]) if rows else 0
    lifted = [tuple(a) + (sum(abs(_frac(c)) for c in a),) for a in rows]
    lifted.append(tuple([0] * m) + (1,))
    b = list(rhs) + [1]
    obj = [0] * m + [1]
    res = maximize(obj, lifted, b)
    if res.status != OPTIMAL:
        return None
    depth = res.value
    if depth < 0:
        return None
    x = tuple(res.duals[:m])
    return depth, x
