"""Binary labels, summaries and summary codebooks.

Bit positions are 1-based and position 1 is the most significant bit of the
n-bit label, so the label of zero-based column ``j`` is simply ``j``. A
codebook row is addressed as ``i * 2**d + pattern`` where ``i`` indexes the
codebook's subsets and bit ``t`` of the d-bit pattern (counting from the
most significant end) is the label bit at ``positions[t]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InvalidArgument

MAX_BITS = 63
MAX_ROWS = 1 << 27


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_BITS:
        raise InvalidArgument(f"bit count n={n} outside [1, {MAX_BITS}]")


@dataclass(frozen=True)
class Label:
    """An n-bit column label; ``bits`` is the zero-based column index."""

    n: int
    bits: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise InvalidArgument(f"label {self.bits} does not fit in {self.n} bits")

    @classmethod
    def from_bitstring(cls, s: str) -> Label:
        if not s or set(s) - {"0", "1"}:
            raise InvalidArgument(f"not a bitstring: {s!r}")
        return cls(len(s), int(s, 2))

    def bitstring(self) -> str:
        return format(self.bits, f"0{self.n}b")

    @property
    def column(self) -> int:
        return self.bits

    def bit(self, position: int) -> int:
        return (self.bits >> (self.n - position)) & 1


@dataclass(frozen=True)
class BitSubset:
    n: int
    positions: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if not 1 <= len(pos) <= self.n:
            raise InvalidArgument(f"subset size {len(pos)} outside [1, {self.n}]")
        if any(a >= b for a, b in zip(pos, pos[1:])):
            raise InvalidArgument(f"positions must be strictly increasing: {pos}")
        if pos[0] < 1 or pos[-1] > self.n:
            raise InvalidArgument(f"positions {pos} outside [1, {self.n}]")

    @property
    def d(self) -> int:
        return len(self.positions)

    @property
    def mask(self) -> int:
        return _mask(self.n, self.positions)


@dataclass(frozen=True)
class Summary:
    subset: BitSubset
    pattern: int

    def __post_init__(self):
        if not 0 <= self.pattern < (1 << self.subset.d):
            raise InvalidArgument(
                f"pattern {self.pattern} does not fit in {self.subset.d} bits"
            )

    def bitstring(self) -> str:
        return format(self.pattern, f"0{self.subset.d}b")


def _mask(n: int, positions: Iterable[int]) -> int:
    out = 0
    for p in positions:
        out |= 1 << (n - p)
    return out


def extract_bits(bits: int, n: int, positions: Sequence[int]) -> int:
    """Pattern formed by the label bits at ``positions``, first position as MSB."""
    out = 0
    for p in positions:
        out = (out << 1) | ((bits >> (n - p)) & 1)
    return out


def deposit_bits(pattern: int, n: int, positions: Sequence[int]) -> int:
    """Inverse of :func:`extract_bits`: place a pattern into label space."""
    out = 0
    d = len(positions)
    for t, p in enumerate(positions):
        if (pattern >> (d - 1 - t)) & 1:
            out |= 1 << (n - p)
    return out


def extract(label: Label, subset: BitSubset) -> int:
    if label.n != subset.n:
        raise InvalidArgument(f"label has n={label.n}, subset has n={subset.n}")
    return extract_bits(label.bits, label.n, subset.positions)


def conforms(label: Label, summary: Summary) -> bool:
    return extract(label, summary.subset) == summary.pattern


@dataclass(frozen=True)
class Codebook:
    """An (m, n, d) summary codebook: m distinct d-subsets times all 2^d patterns.

    ``requested_m`` records how many subsets were drawn for a random codebook
    before duplicates were dropped; it is ``m`` otherwise.
    """

    n: int
    d: int
    subsets: tuple[tuple[int, ...], ...]
    requested_m: int = field(default=0, compare=False)

    def __post_init__(self):
        _check_n(self.n)
        if not 1 <= self.d <= self.n:
            raise InvalidArgument(f"summary width d={self.d} outside [1, {self.n}]")
        subs = tuple(BitSubset(self.n, s).positions for s in self.subsets)
        object.__setattr__(self, "subsets", subs)
        if not subs:
            raise InvalidArgument("a codebook needs at least one subset")
        if any(len(s) != self.d for s in subs):
            raise InvalidArgument(f"all subsets must have size d={self.d}")
        if len(set(subs)) != len(subs):
            raise InvalidArgument("codebook subsets must be distinct")
        if len(subs) << self.d > MAX_ROWS:
            raise CapacityError(
                f"codebook has {len(subs)} * 2^{self.d} rows, above {MAX_ROWS}"
            )
        if not self.requested_m:
            object.__setattr__(self, "requested_m", len(subs))

    @property
    def m(self) -> int:
        return len(self.subsets)

    @property
    def rows(self) -> int:
        return self.m << self.d

    def subset(self, i: int) -> BitSubset:
        return BitSubset(self.n, self.subsets[i])

    def row_index(self, subset_index: int, pattern: int) -> int:
        if not 0 <= subset_index < self.m:
            raise InvalidArgument(f"subset index {subset_index} outside [0, {self.m})")
        if not 0 <= pattern < (1 << self.d):
            raise InvalidArgument(f"pattern {pattern} outside [0, 2^{self.d})")
        return (subset_index << self.d) | pattern

    def summary_of_row(self, row: int) -> Summary:
        if not 0 <= row < self.rows:
            raise InvalidArgument(f"row {row} outside [0, {self.rows})")
        return Summary(self.subset(row >> self.d), row & ((1 << self.d) - 1))

    @cached_property
    def positions(self) -> np.ndarray:
        arr = np.array(self.subsets, dtype=np.int64).reshape(self.m, self.d)
        arr.flags.writeable = False
        return arr

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Label-space bit mask of every subset."""
        return tuple(_mask(self.n, s) for s in self.subsets)

    @cached_property
    def _shifts(self) -> np.ndarray:
        return (self.n - self.positions).astype(np.uint64)

    @cached_property
    def _weights(self) -> np.ndarray:
        return np.left_shift(np.uint64(1), np.arange(self.d - 1, -1, -1, dtype=np.uint64))

    def patterns(self, labels) -> np.ndarray:
        """Patterns of each label on each subset, shape ``(len(labels), m)``."""
        lab = np.asarray(labels, dtype=np.uint64).reshape(-1)
        bits = (lab[:, None, None] >> self._shifts[None, :, :]) & np.uint64(1)
        return (bits * self._weights).sum(axis=2, dtype=np.uint64).astype(np.int64)

    def conforming_rows(self, labels) -> np.ndarray:
        """Row indices hit by each label, shape ``(len(labels), m)``."""
        offsets = np.arange(self.m, dtype=np.int64) << self.d
        return self.patterns(labels) + offsets[None, :]

    def deposit_rows(self, rows) -> np.ndarray:
        """Label-space bits of the pattern of each row (vectorised deposit)."""
        rows = np.asarray(rows, dtype=np.int64)
        sub = rows >> self.d
        pat = (rows & ((1 << self.d) - 1)).astype(np.uint64)
        tbits = (pat[:, None] >> self._weights_shift[None, :]) & np.uint64(1)
        placed = tbits << self._shifts[sub]
        return np.bitwise_or.reduce(placed, axis=1)

    @cached_property
    def _weights_shift(self) -> np.ndarray:
        return np.arange(self.d - 1, -1, -1, dtype=np.uint64)


def complete_codebook(n: int, d: int) -> Codebook:
    _check_n(n)
    if not 1 <= d <= n:
        raise InvalidArgument(f"summary width d={d} outside [1, {n}]")
    if math.comb(n, d) << d > MAX_ROWS:
        raise CapacityError(f"complete ({n},{d}) codebook exceeds {MAX_ROWS} rows")
    return Codebook(n, d, tuple(itertools.combinations(range(1, n + 1), d)))


def random_codebook(n: int, d: int, m: int, seed, distinct: bool = False) -> Codebook:
    """Draw ``m`` uniform d-subsets with replacement and drop repeats.

    With ``distinct=True`` draws continue until exactly ``m`` distinct
    subsets are collected.
    """
    _check_n(n)
    if not 1 <= d <= n:
        raise InvalidArgument(f"summary width d={d} outside [1, {n}]")
    if m < 1:
        raise InvalidArgument(f"m={m} must be positive")
    if distinct and m > math.comb(n, d):
        raise InvalidArgument(f"cannot pick {m} distinct subsets out of C({n},{d})")
    rng = np.random.default_rng(seed)
    seen: dict[tuple[int, ...], None] = {}
    drawn = 0
    while True:
        batch = m - drawn if not distinct else max(m - len(seen), 1)
        draws = np.sort(rng.random((batch, n)).argsort(axis=1)[:, :d], axis=1) + 1
        for row in draws.tolist():
            drawn += 1
            seen.setdefault(tuple(row), None)
            if distinct and len(seen) == m:
                break
        if not distinct or len(seen) == m:
            break
    return Codebook(n, d, tuple(seen), requested_m=m)
