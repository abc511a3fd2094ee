"""Mix-and-Match decoding over a stacked codebook.

The first block (a random summary codebook) is only used to learn which
values occur in the signal: the smallest measurement not yet explained as a
subset sum of the known values must itself be a value. The second block, a
complete width-1 codebook, then reveals each bit of every value's label: the
measurement at ``({i}, c)`` is the sum of exactly those values whose label
has bit i equal to c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, complete_codebook, random_codebook
from .errors import CapacityError, InvalidArgument
from .measurements import MeasurementVector, encode, encode_values
from .signal import SparseSignal
from .ssii import CONTRADICTION, FAILURE, SUCCESS, DecodeResult

MAX_MM_K = 24
_MITM_ABOVE = 16


class MMFailure(Exception):
    """Raised internally when a phase cannot explain the measurements."""


@dataclass(frozen=True)
class StackedCodebook:
    part1: Codebook
    part2: Codebook

    def __post_init__(self):
        if self.part1.n != self.part2.n:
            raise InvalidArgument("both parts must share n")
        if self.part2 != complete_codebook(self.part2.n, 1):
            raise InvalidArgument("part2 must be the complete width-1 codebook")

    @classmethod
    def build(cls, n: int, d: int, m: int, seed=None, distinct: bool = False) -> StackedCodebook:
        return cls(random_codebook(n, d, m, seed, distinct), complete_codebook(n, 1))

    @property
    def n(self) -> int:
        return self.part1.n

    @property
    def rows(self) -> int:
        return self.part1.rows + self.part2.rows


@dataclass
class StackedMeasurements:
    codebook: StackedCodebook
    y1: MeasurementVector
    y2: MeasurementVector


def encode_stacked(signal: SparseSignal, stacked: StackedCodebook) -> StackedMeasurements:
    return StackedMeasurements(stacked, encode(signal, stacked.part1), encode(signal, stacked.part2))


def identify_values(y1) -> list[int]:
    """Smallest-unexplained-value greedy; returns the values in the order found."""
    vals = np.asarray(y1.values if isinstance(y1, MeasurementVector) else y1)
    if isinstance(y1, MeasurementVector):
        if not y1.mode.exact:
            raise InvalidArgument("Mix-and-Match requires integer measurements")
        vals = vals[y1.observed()]
    if vals.dtype.kind not in "iu":
        raise InvalidArgument("Mix-and-Match requires integer measurements")
    pending = sorted({int(v) for v in vals.tolist() if v != 0})
    if any(v < 0 for v in pending):
        raise InvalidArgument("Mix-and-Match requires nonnegative measurements")
    found: list[int] = []
    sums = {0}
    for v in pending:
        if v in sums:
            continue
        if len(found) >= MAX_MM_K:
            raise CapacityError(f"more than {MAX_MM_K} values; subset sums would explode")
        found.append(v)
        sums |= {s + v for s in sums}
    return found


def _sum_table(values: list[int]) -> dict[int, int | None]:
    """Map each achievable sum to the bitmask of the subset producing it.

    Sums reached by more than one subset map to ``None``.
    """
    table: dict[int, int | None] = {0: 0}
    for i, v in enumerate(values):
        bit = 1 << i
        for s, mask in list(table.items()):
            t = s + v
            table[t] = None if t in table or mask is None else mask | bit
    return table


def _sum_index(values: list[int]):
    """Lookup ``sum -> subset mask`` (None when absent or ambiguous).

    Above ``_MITM_ABOVE`` values the table is split in two halves and
    queries are answered meet-in-the-middle style.
    """
    if len(values) <= _MITM_ABOVE:
        return _sum_table(values).get
    half = len(values) // 2
    lo_tab = _sum_table(values[:half])
    hi_tab = _sum_table(values[half:])

    def lookup(target: int):
        hit = None
        for s_hi, m_hi in hi_tab.items():
            if s_hi > target:
                continue
            m_lo = lo_tab.get(target - s_hi, -1)
            if m_lo == -1:
                continue
            if hit is not None or m_lo is None or m_hi is None:
                return None
            hit = m_lo | (m_hi << half)
        return hit

    return lookup


def identify_support(values: list[int], y2: MeasurementVector, n: int) -> SparseSignal:
    """Read every label bit off the complete width-1 block."""
    k = len(values)
    if k == 0:
        if np.any(y2.values[y2.observed()] != 0):
            raise MMFailure("no values but the width-1 block is nonzero")
        return SparseSignal(n, ())
    if k > MAX_MM_K:
        raise CapacityError(f"k={k} exceeds {MAX_MM_K}")
    if len(set(values)) != k or min(values) <= 0:
        raise MMFailure("values must be distinct and positive")
    cb = y2.codebook
    lookup = _sum_index(list(values))
    full = (1 << k) - 1
    labels = [0] * k
    for pos in range(1, n + 1):
        covered = {0: 0, 1: 0}
        for c in (0, 1):
            row = cb.row_index(pos - 1, c)
            if y2.missing is not None and y2.missing[row]:
                raise MMFailure(f"width-1 measurement for bit {pos} is missing")
            v = int(y2.values[row])
            if v == 0:
                continue
            mask = lookup(v)
            if mask is None:
                raise MMFailure(f"no unique subset of values sums to {v} (bit {pos})")
            covered[c] = mask
        if covered[0] & covered[1] or (covered[0] | covered[1]) != full:
            raise MMFailure(f"bit {pos}: the two patterns do not partition the values")
        shift = n - pos
        for j in range(k):
            if covered[1] >> j & 1:
                labels[j] |= 1 << shift
    if len(set(labels)) != k:
        raise MMFailure("two values were assigned the same label")
    return SparseSignal(n, tuple(zip(labels, values)))


def decode_mm(y: StackedMeasurements) -> DecodeResult:
    stacked = y.codebook
    n = stacked.n
    for part in (y.y1, y.y2):
        if not part.mode.exact:
            raise InvalidArgument("Mix-and-Match requires integer mode")
    empty = SparseSignal(n, ())
    try:
        values = identify_values(y.y1)
        recovered = identify_support(values, y.y2, n)
    except MMFailure as exc:
        return DecodeResult(empty, FAILURE, 0, None, str(exc))
    ok = y.y1.agrees_with(encode_values(recovered, stacked.part1)) and y.y2.agrees_with(
        encode_values(recovered, stacked.part2)
    )
    if not ok:
        return DecodeResult(
            recovered, CONTRADICTION, 1, None,
            "re-encoding the recovered signal does not reproduce y",
        )
    return DecodeResult(recovered, SUCCESS, 1)
