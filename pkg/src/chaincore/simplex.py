"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0``. Entering variable: smallest
index with a negative reduced cost. Leaving variable: minimum ratio, ties
broken by the smallest basic-variable index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    #: multipliers of the equality rows, i.e. an optimal solution of the dual
    duals: Optional[np.ndarray] = None
    iterations: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])


def _run(T: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int) -> tuple[str, int]:
    """Iterate on tableau ``T`` (last row = reduced costs, last column = rhs)."""
    it = 0
    nrows = len(basis)
    while True:
        neg = np.flatnonzero(T[-1, :ncols] < -tol)
        if neg.size == 0:
            return OPTIMAL, it
        col = int(neg[0])
        column = T[:nrows, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * (1.0 + abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it >= max_iter:
            raise RuntimeError("simplex iteration limit reached")


def simplex_bland(c, A, b, tol: float = 1e-9, max_iter: int = 100_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    Ap = A * sign[:, None]
    bp = b * sign

    # phase one: artificial columns n .. n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = Ap
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = bp
    T[-1, :n] = -Ap.sum(axis=0)
    T[-1, -1] = -bp.sum()
    basis = list(range(n, n + m))
    status, it1 = _run(T, basis, n + m, tol, max_iter)
    if -T[-1, -1] > tol * (1.0 + np.abs(bp).sum()):
        return LPResult(INFEASIBLE, iterations=it1)

    # drive remaining artificials out; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cand = np.flatnonzero(np.abs(T[r, :n]) > tol)
            if cand.size:
                _pivot(T, r, int(cand[0]))
                basis[r] = int(cand[0])
                keep.append(r)
        else:
            keep.append(r)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis = [basis[r] for r in keep]
    cb = c[basis]
    T2[-1, :n] = c - cb @ T2[:-1, :n]
    T2[-1, -1] = -cb @ T2[:-1, -1]
    status, it2 = _run(T2, basis, n, tol, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=it1 + it2)

    x = np.zeros(n)
    x[basis] = T2[:-1, -1]
    duals = np.zeros(m)
    B = A[keep][:, basis]
    duals[keep] = np.linalg.solve(B.T, c[basis])
    return LPResult(OPTIMAL, x, float(c @ x), duals, it1 + it2)
