"""Nonnegative l1 minimisation over the dense measurement matrix.

Only usable for small n: the matrix has 2^n columns. A generic presolve
removes what nonnegativity already decides (a zero measurement forces every
column it touches to zero) before the in-repo simplex runs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .codebook import Codebook
from .errors import CapacityError, InfeasibleError, InvalidArgument
from .measurements import MeasurementVector, materialize_dense
from .signal import SparseSignal, ValueMode
from .simplex import LinearProgram, solve_lp

MAX_BP_BITS = 12
SUPPORT_THRESHOLD = 1e-6


@lru_cache(maxsize=8)
def _dense(codebook: Codebook) -> np.ndarray:
    A = materialize_dense(codebook).astype(bool)
    A.flags.writeable = False
    return A


def solve_bp(y: MeasurementVector, tol: float = 1e-8) -> SparseSignal:
    """Minimise sum(x) subject to A x = y, x >= 0.

    Entries below ``SUPPORT_THRESHOLD`` times the largest entry are zeroed.
    Raises :class:`InfeasibleError` when no nonnegative x reproduces y.
    """
    cb = y.codebook
    if cb.n > MAX_BP_BITS:
        raise CapacityError(
            f"basis pursuit materialises 2^n columns; n={cb.n} exceeds {MAX_BP_BITS}"
        )
    mode = ValueMode("real", max(tol, 1e-12))
    obs = y.observed()
    vals = y.values.astype(float)
    if np.any(vals[obs] < 0):
        raise InvalidArgument("basis pursuit expects nonnegative measurements")
    if not np.any(vals[obs] > 0):
        return SparseSignal(cb.n, (), mode)

    A = _dense(cb)
    scale = float(vals[obs].max())
    zero = obs & (vals == 0)
    alive = ~A[zero].any(axis=0)
    cols = np.flatnonzero(alive)
    rows = np.flatnonzero(obs & (vals > 0))
    sub = A[np.ix_(rows, cols)]
    rhs = vals[rows] / scale
    if cols.size == 0 or not sub.any(axis=1).all():
        raise InfeasibleError("a nonzero measurement has no admissible column")

    uniq, inverse = np.unique(sub, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    urhs = np.zeros(len(uniq))
    urhs[inverse] = rhs
    if np.abs(urhs[inverse] - rhs).max() > tol:
        raise InfeasibleError("identical rows carry different measurements")

    lp = LinearProgram(np.ones(cols.size), uniq.astype(float), urhs)
    sol = solve_lp(lp, tol=tol)
    x = sol.x
    if np.abs(sub @ x - rhs).max() > 1e3 * tol:
        raise InfeasibleError("simplex solution does not reproduce the measurements")
    x[x < SUPPORT_THRESHOLD * x.max()] = 0.0
    keep = np.flatnonzero(x)
    return SparseSignal(
        cb.n, tuple(zip(cols[keep].tolist(), (x[keep] * scale).tolist())), mode
    )
