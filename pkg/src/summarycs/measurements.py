"""The implicit measurement operator y = A x of a summary codebook."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook
from .errors import CapacityError, ContradictionError, InvalidArgument
from .signal import EXACT, SparseSignal, ValueMode

MAX_DENSE_BITS = 14


@dataclass
class MeasurementVector:
    """Measurements indexed by codebook row.

    ``missing`` flags rows that were never observed (partial ingestion);
    such rows are neither grouped nor treated as zero.
    """

    codebook: Codebook
    values: np.ndarray
    mode: ValueMode = EXACT
    nonnegative: bool = True
    missing: np.ndarray | None = field(default=None)

    def __post_init__(self):
        dtype = np.int64 if self.mode.exact else np.float64
        self.values = np.asarray(self.values, dtype=dtype)
        if self.values.shape != (self.codebook.rows,):
            raise InvalidArgument(
                f"expected {self.codebook.rows} measurements, got {self.values.shape}"
            )
        if self.missing is not None:
            self.missing = np.asarray(self.missing, dtype=bool)
            if not self.missing.any():
                self.missing = None

    def copy(self) -> MeasurementVector:
        return MeasurementVector(
            self.codebook,
            self.values.copy(),
            self.mode,
            self.nonnegative,
            None if self.missing is None else self.missing.copy(),
        )

    def observed(self) -> np.ndarray:
        if self.missing is None:
            return np.ones(self.values.shape, dtype=bool)
        return ~self.missing

    def nonzero_rows(self) -> np.ndarray:
        """Rows that may be nonzero: observed nonzero or unobserved."""
        nz = self.values != 0
        if self.missing is not None:
            nz |= self.missing
        return np.flatnonzero(nz)

    def is_zero(self) -> bool:
        return not np.any(self.values[self.observed()] != 0)

    def agrees_with(self, other: np.ndarray) -> bool:
        """Entrywise equality on observed rows (tolerance in real mode)."""
        obs = self.observed()
        a, b = self.values[obs], np.asarray(other)[obs]
        if self.mode.exact:
            return bool(np.array_equal(a, b))
        scale = np.maximum(np.abs(a), np.abs(b))
        return bool(np.all(np.abs(a - b) <= self.mode.tol * np.maximum(scale, 1e-300)))


def encode_values(signal: SparseSignal, codebook: Codebook) -> np.ndarray:
    if signal.n != codebook.n:
        raise InvalidArgument(f"signal has n={signal.n}, codebook has n={codebook.n}")
    dtype = np.int64 if signal.mode.exact else np.float64
    y = np.zeros(codebook.rows, dtype=dtype)
    if signal.k:
        rows = codebook.conforming_rows(signal.labels)
        np.add.at(y, rows.ravel(), np.repeat(signal.values, codebook.m))
    return y


def encode(signal: SparseSignal, codebook: Codebook) -> MeasurementVector:
    return MeasurementVector(
        codebook, encode_values(signal, codebook), signal.mode, signal.nonnegative
    )


def subtract(y: MeasurementVector, label: int, value) -> MeasurementVector:
    """Remove one entry from ``y`` in place.

    In nonnegative exact mode a subtraction that would drive an observed
    entry negative raises :class:`ContradictionError` and leaves ``y`` intact.
    """
    cb = y.codebook
    if not 0 <= label < (1 << cb.n):
        raise InvalidArgument(f"label {label} does not fit in {cb.n} bits")
    if value == 0:
        return y
    rows = cb.conforming_rows([label])[0]
    after = y.values[rows] - value
    if y.nonnegative and y.mode.exact:
        bad = after < 0
        if y.missing is not None:
            bad &= ~y.missing[rows]
        if bad.any():
            raise ContradictionError(
                f"subtracting {value} at label {label} makes measurements negative"
            )
    y.values[rows] = after
    return y


def materialize_dense(codebook: Codebook) -> np.ndarray:
    """The explicit M x 2^n 0/1 matrix; only for small n."""
    if codebook.n > MAX_DENSE_BITS:
        raise CapacityError(
            f"dense materialisation needs n <= {MAX_DENSE_BITS}, got {codebook.n}"
        )
    N = 1 << codebook.n
    A = np.zeros((codebook.rows, N), dtype=np.uint8)
    rows = codebook.conforming_rows(np.arange(N))
    A[rows, np.arange(N)[:, None]] = 1
    return A


@dataclass
class Grouping:
    groups: list[tuple[float, np.ndarray]]
    zero_rows: np.ndarray


def group_equal(y: MeasurementVector) -> Grouping:
    """Partition observed nonzero rows into equal-value groups, sorted by value.

    Real mode merges sorted neighbours whose gap is within the relative
    tolerance (single linkage).
    """
    obs = y.observed()
    vals = y.values
    nz = np.flatnonzero((vals != 0) & obs)
    zero_rows = np.flatnonzero((vals == 0) & obs)
    if nz.size == 0:
        return Grouping([], zero_rows)
    order = np.argsort(vals[nz], kind="stable")
    rows = nz[order]
    v = vals[rows]
    if y.mode.exact:
        breaks = v[1:] != v[:-1]
    else:
        scale = np.maximum(np.abs(v[1:]), np.abs(v[:-1]))
        breaks = np.abs(v[1:] - v[:-1]) > y.mode.tol * scale
    starts = np.flatnonzero(np.r_[True, breaks])
    ends = np.r_[starts[1:], len(rows)]
    groups = []
    for a, b in zip(starts.tolist(), ends.tolist()):
        members = np.sort(rows[a:b])
        value = v[a] if y.mode.exact else float(np.mean(v[a:b]))
        groups.append((value.item() if hasattr(value, "item") else value, members))
    return Grouping(groups, zero_rows)
