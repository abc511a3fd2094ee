"""Sparse test signals and the distinguishability predicate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .codebook import MAX_BITS
from .errors import CapacityError, InvalidArgument

VALUE_RANGE = 1 << 40
MAX_DISTINGUISHABLE_K = 20


@dataclass(frozen=True)
class ValueMode:
    """Exact integers (``kind="int"``) or reals compared with relative tolerance."""

    kind: str = "int"
    tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("int", "real"):
            raise InvalidArgument(f"unknown value mode {self.kind!r}")
        if self.kind == "real" and not self.tol > 0:
            raise InvalidArgument("real mode needs a positive tolerance")

    @property
    def exact(self) -> bool:
        return self.kind == "int"

    def close(self, a, b) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= self.tol * max(abs(a), abs(b))


EXACT = ValueMode("int")


@dataclass(frozen=True)
class SparseSignal:
    """k nonzero entries of a length-2^n vector, keyed by zero-based label."""

    n: int
    entries: tuple[tuple[int, float], ...]
    mode: ValueMode = EXACT
    nonnegative: bool = True

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BITS:
            raise InvalidArgument(f"bit count n={self.n} outside [1, {MAX_BITS}]")
        cast = int if self.mode.exact else float
        entries = tuple(sorted((int(b), cast(v)) for b, v in self.entries))
        object.__setattr__(self, "entries", entries)
        labels = [b for b, _ in entries]
        if len(set(labels)) != len(labels):
            raise InvalidArgument("signal labels must be distinct")
        for b, v in entries:
            if not 0 <= b < (1 << self.n):
                raise InvalidArgument(f"label {b} does not fit in {self.n} bits")
            if v == 0:
                raise InvalidArgument(f"entry at label {b} is zero")
            if self.nonnegative and v < 0:
                raise InvalidArgument(f"negative value {v} in a nonnegative signal")

    @classmethod
    def from_dict(cls, n: int, values: dict, mode: ValueMode = EXACT) -> SparseSignal:
        return cls(n, tuple(values.items()), mode)

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> np.ndarray:
        return np.array([b for b, _ in self.entries], dtype=np.uint64)

    @property
    def values(self) -> np.ndarray:
        dtype = np.int64 if self.mode.exact else np.float64
        return np.array([v for _, v in self.entries], dtype=dtype)

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def matches(self, other: SparseSignal, rtol: float | None = None) -> bool:
        """Same labels and values; exact unless a relative tolerance applies."""
        if self.n != other.n or self.k != other.k:
            return False
        if rtol is None and self.mode.exact and other.mode.exact:
            return self.entries == other.entries
        if rtol is None:
            rtol = max(self.mode.tol if not self.mode.exact else 0.0,
                       other.mode.tol if not other.mode.exact else 0.0)
        for (b1, v1), (b2, v2) in zip(self.entries, other.entries):
            if b1 != b2 or abs(v1 - v2) > rtol * max(abs(v1), abs(v2)):
                return False
        return True


def generate(n: int, k: int, mode: ValueMode = EXACT, seed=None) -> SparseSignal:
    """Random k-sparse nonnegative signal with uniform distinct labels.

    Exact mode draws integers uniformly from ``[1, 2**40]``; real mode draws
    from the open interval (0, 1).
    """
    if not 1 <= n <= MAX_BITS:
        raise InvalidArgument(f"bit count n={n} outside [1, {MAX_BITS}]")
    if k < 0 or k > (1 << n):
        raise InvalidArgument(f"cannot place k={k} entries among 2^{n} labels")
    rng = np.random.default_rng(seed)
    if 4 * k >= (1 << n):
        labels = rng.permutation(1 << n)[:k].tolist()
    else:
        picked: dict[int, None] = {}
        while len(picked) < k:
            draws = rng.integers(0, 1 << n, size=k - len(picked), dtype=np.uint64)
            for b in draws.tolist():
                picked.setdefault(b, None)
        labels = list(picked)[:k]
    if mode.exact:
        values = rng.integers(1, VALUE_RANGE, size=k, endpoint=True).tolist()
    else:
        values = []
        while len(values) < k:
            v = float(rng.random())
            if v > 0:
                values.append(v)
    return SparseSignal(n, tuple(zip(labels, values)), mode)


def _has_equal_disjoint_sums(values: list) -> bool:
    # Two nonempty disjoint subsets with equal sums exist iff two distinct
    # subsets P, Q, neither containing the other, have equal sums (take P\Q
    # and Q\P). Subset sums are enumerated once (2^k) instead of 3^k pairs.
    sums = np.zeros(1, dtype=np.asarray(values).dtype)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    order = np.argsort(sums, kind="stable")
    s = sums[order]
    dup = np.flatnonzero(s[1:] == s[:-1])
    if dup.size == 0:
        return False
    # group runs of equal sums and test containment pairwise inside each run
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], len(s)]
    for a, b in zip(starts, ends):
        if b - a < 2:
            continue
        masks = order[a:b].tolist()
        for i, p in enumerate(masks):
            for q in masks[i + 1:]:
                if p & q != p and p & q != q:
                    return True
    return False


def is_distinguishable(signal: SparseSignal | Iterable) -> bool:
    """True iff no two nonempty disjoint subsets of the values share a sum."""
    values = [v for _, v in signal.entries] if isinstance(signal, SparseSignal) else list(signal)
    if len(values) > MAX_DISTINGUISHABLE_K:
        raise CapacityError(
            f"brute-force distinguishability is capped at k={MAX_DISTINGUISHABLE_K}"
        )
    if len(values) < 2:
        return True
    if all(isinstance(v, (int, np.integer)) for v in values):
        return not _has_equal_disjoint_sums([int(v) for v in values])
    return not _has_equal_disjoint_sums([float(v) for v in values])
