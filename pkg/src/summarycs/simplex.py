"""Dense two-phase simplex for small equality-form linear programs.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0`` with Bland's pivoting rule,
which cannot cycle. Meant for the reduced problems left after presolve, not
for large sparse systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidArgument, IterationLimitError


@dataclass
class LinearProgram:
    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.a_eq = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float)
        rows, cols = self.a_eq.shape
        if self.objective.shape != (cols,) or self.b_eq.shape != (rows,):
            raise InvalidArgument(
                f"inconsistent LP shapes: c {self.objective.shape}, "
                f"A {self.a_eq.shape}, b {self.b_eq.shape}"
            )
        if not np.all(np.isfinite(self.b_eq)):
            raise InvalidArgument("right-hand side must be finite")


@dataclass
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])


def _run(T, basis, ncols, tol, max_iter, it):
    rows = len(basis)
    while True:
        reduced = T[-1, :ncols]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return it
        j = int(entering[0])
        col = T[:rows, j]
        pos = np.flatnonzero(col > tol)
        if pos.size == 0:
            raise InvalidArgument("linear program is unbounded")
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, i, j)
        basis[i] = j
        it += 1
        if it > max_iter:
            raise IterationLimitError(f"simplex exceeded {max_iter} pivots")


def solve_lp(lp: LinearProgram, tol: float = 1e-9, max_iter: int | None = None) -> LPSolution:
    A = lp.a_eq.copy()
    b = lp.b_eq.copy()
    c = lp.objective
    rows, cols = A.shape
    if max_iter is None:
        max_iter = 50 * (rows + cols) + 100
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial identity basis, minimise the artificial sum
    T = np.zeros((rows + 1, cols + rows + 1))
    T[:rows, :cols] = A
    T[:rows, cols:cols + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[-1, :cols] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(cols, cols + rows))
    it = _run(T, basis, cols + rows, tol, max_iter, 0)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > tol * scale * max(rows, 1):
        raise InfeasibleError(f"phase 1 residual {-T[-1, -1]:.3g}")

    # drive artificials out of the basis; rows where that is impossible are redundant
    keep = []
    for i in range(rows):
        if basis[i] >= cols:
            cand = np.flatnonzero(np.abs(T[i, :cols]) > tol)
            if cand.size == 0:
                continue
            _pivot(T, i, int(cand[0]))
            basis[i] = int(cand[0])
        keep.append(i)
    T = np.vstack([T[keep][:, list(range(cols)) + [T.shape[1] - 1]], np.zeros(cols + 1)])
    basis = [basis[i] for i in keep]

    # phase 2
    T[-1, :cols] = c
    for i, j in enumerate(basis):
        T[-1] -= c[j] * T[i]
    it = _run(T, basis, cols, tol, max_iter, it)
    x = np.zeros(cols)
    x[basis] = T[:-1, -1]
    x[x < 0] = 0.0
    return LPSolution(x, float(c @ x), it)
