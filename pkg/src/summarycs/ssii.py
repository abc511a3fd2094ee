"""Summarized support index inference (SSII).

The decoder repeatedly looks for a nonzero measurement value whose
occurrences pin down a complete label, fills bits the occurrences leave
open from the pattern of zero rows, subtracts the inferred entry and starts
over. It stops when every measurement is zero (success) or when a full
pass over the value groups makes no progress (partial).

Two additions keep the output sound. A label is accepted only if every
summary it conforms to still holds at least its value, and a successful
decode is re-encoded and compared with the input. For nonnegative exact
signals a row holding less than the candidate value cannot contain that
entry, so completion treats such rows as zero (``value_filter``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContradictionError
from .measurements import MeasurementVector, encode_values, group_equal
from .signal import SparseSignal

SUCCESS = "success"
PARTIAL = "partial"
CONTRADICTION = "contradiction"
FAILURE = "failure"

_INF = float("inf")


@dataclass(frozen=True)
class PartialLabel:
    """A label with some bits assigned; ``bits`` is zero outside ``known``."""

    n: int
    known: int = 0
    bits: int = 0

    @property
    def complete(self) -> bool:
        return self.known == (1 << self.n) - 1

    def assign(self, mask: int, bits: int) -> PartialLabel | Conflict:
        bits &= mask
        clash = (self.bits ^ bits) & self.known & mask
        if clash:
            return Conflict(self.n - clash.bit_length() + 1)
        return PartialLabel(self.n, self.known | mask, self.bits | bits)

    def bitstring(self) -> str:
        out = []
        for p in range(1, self.n + 1):
            shift = self.n - p
            out.append(str((self.bits >> shift) & 1) if (self.known >> shift) & 1 else "?")
        return "".join(out)


@dataclass(frozen=True)
class Conflict:
    """A bit position (1-based, MSB first) asked to be both 0 and 1.

    Position 0 marks a dead end instead: some subset has no row left that
    could hold the entry.
    """

    position: int


@dataclass
class DecodeLimits:
    """Outer-iteration cap, ``4 * k_max + 16``.

    ``k_max`` defaults to the number of nonzero measurements.
    """

    max_iterations: int | None = None
    k_max: int | None = None

    def iterations_for(self, y: MeasurementVector) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        k_max = self.k_max if self.k_max is not None else int(y.nonzero_rows().size)
        return 4 * k_max + 16


@dataclass
class DecodeResult:
    recovered: SparseSignal
    status: str
    iterations: int = 0
    residual: np.ndarray | None = field(default=None, repr=False)
    message: str = ""

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def status_line(self) -> str:
        return f"status={self.status} iterations={self.iterations}"


class _Workspace:
    """Residual measurements with per-subset indexes of the possibly-nonzero rows."""

    def __init__(self, y: MeasurementVector, value_filter: bool = True):
        cb = y.codebook
        self.cb = cb
        self.y = y.copy()
        self.masks = cb.masks
        self.full = (1 << cb.n) - 1
        self.filter = value_filter and y.nonnegative and y.mode.exact
        rows = y.nonzero_rows()
        deps = cb.deposit_rows(rows).tolist() if rows.size else []
        vals = y.values[rows].tolist()
        if y.missing is not None:
            vals = [_INF if miss else v for v, miss in zip(vals, y.missing[rows].tolist())]
        self.val: dict[int, float] = {}
        self.dep: dict[int, int] = {}
        self.by_subset: list[dict[int, int]] = [{} for _ in range(cb.m)]
        self.groups: dict[float, set[int]] = {}
        d = cb.d
        for r, dep, v in zip(rows.tolist(), deps, vals):
            self.val[r] = v
            self.dep[r] = dep
            self.by_subset[r >> d][r] = dep
            if v != _INF:
                self.groups.setdefault(v, set()).add(r)

    def deposit(self, row: int) -> int:
        dep = self.dep.get(row)
        if dep is None:
            dep = int(self.cb.deposit_rows([row])[0])
        return dep

    def is_zero(self) -> bool:
        return not self.groups

    def value_groups(self, skip=()) -> list[tuple[float, Sequence[int]]]:
        """Groups ordered by descending occurrence count, then descending value."""
        if self.y.mode.exact:
            keys = sorted(
                (v for v in self.groups if v not in skip),
                key=lambda v: (-len(self.groups[v]), -v),
            )
            return [(v, sorted(self.groups[v])) for v in keys]
        items = [(v, rs.tolist()) for v, rs in group_equal(self.y).groups]
        items.sort(key=lambda g: (-len(g[1]), -g[0]))
        return items

    def acceptable(self, label: int, value) -> bool:
        # every conforming observed row must still be able to hold the entry
        for r in self.cb.conforming_rows([label])[0].tolist():
            v = self.val.get(r, 0)
            if v == _INF:
                continue
            if (v < value) if self.filter else (v == 0):
                return False
        return True

    def subtract(self, label: int, value) -> list[tuple[int, float]]:
        """Remove an entry; returns the changed rows with their old values."""
        rows = self.cb.conforming_rows([label])[0].tolist()
        if self.y.nonnegative and self.y.mode.exact:
            for r in rows:
                v = self.val.get(r, 0)
                if v != _INF and v - value < 0:
                    raise ContradictionError(
                        f"subtracting {value} at label {label} makes measurements negative"
                    )
        changed = []
        d = self.cb.d
        val, groups, values = self.val, self.groups, self.y.values
        exact, tol = self.y.mode.exact, self.y.mode.tol
        for r in rows:
            old = val.get(r, 0)
            if old == _INF:
                continue
            new = old - value
            if not exact and abs(new) <= tol * max(abs(old), abs(value)):
                new = 0.0
            values[r] = new
            if old != 0:
                grp = groups[old]
                grp.discard(r)
                if not grp:
                    del groups[old]
            if new != 0:
                val[r] = new
                grp = groups.get(new)
                if grp is None:
                    groups[new] = {r}
                else:
                    grp.add(r)
                if r not in self.dep:
                    self.dep[r] = self.deposit(r)
                    self.by_subset[r >> d][r] = self.dep[r]
            else:
                del val[r]
                self.by_subset[r >> d].pop(r, None)
            changed.append((r, old))
        return changed

    def pin(self, rows: Sequence[int]) -> PartialLabel | Conflict:
        """Set b(S_i) := c_i for every summary in ``rows``."""
        known = bits = 0
        masks = self.masks
        d = self.cb.d
        n = self.cb.n
        for r in rows:
            r = int(r)
            mask = masks[r >> d]
            dep = self.deposit(r)
            clash = (bits ^ dep) & known & mask
            if clash:
                return Conflict(n - clash.bit_length() + 1)
            known |= mask
            bits |= dep
        return PartialLabel(n, known, bits)

    def complete(self, b: PartialLabel, value=None, common_bits: bool = False):
        """Zero-row completion; returns ``(label_or_conflict, watched_rows)``.

        ``watched_rows`` are the candidate rows seen in the last sweep; the
        outcome cannot change until one of them changes.
        """
        known, bits = b.known, b.bits
        full = self.full
        val = self.val
        cap = value if self.filter else None
        watched: list[int] = []
        changed = True
        while changed and known != full:
            changed = False
            watched = []
            for i, mask in enumerate(self.masks):
                if not mask & ~known:
                    continue
                fixed = known & mask
                hits = []
                for r, dep in self.by_subset[i].items():
                    if not (dep ^ bits) & fixed and (cap is None or val[r] >= cap):
                        hits.append(dep)
                        watched.append(r)
                        if len(hits) > 1 and not common_bits:
                            break
                if not hits:
                    return Conflict(0), []
                agree = mask & ~known
                if len(hits) > 1:
                    if not common_bits:
                        continue
                    for dep in hits[1:]:
                        agree &= ~(dep ^ hits[0])
                    if not agree:
                        continue
                bits |= hits[0] & agree
                known |= agree
                changed = True
                if known == full:
                    break
        return PartialLabel(b.n, known, bits), watched


def zero_row_completion(
    b: PartialLabel,
    y: MeasurementVector,
    value=None,
    value_filter: bool = True,
    common_bits: bool = False,
) -> PartialLabel:
    """Assign b(S') := c' wherever exactly one pattern consistent with b is nonzero on S'.

    ``value`` enables the nonnegative capacity test (rows below it count as
    zero). A dead end leaves ``b`` as far as it got.
    """
    ws = _Workspace(y, value_filter)
    out, _ = ws.complete(b, value, common_bits)
    return b if isinstance(out, Conflict) else out


def infer_label(
    rows: Sequence[int],
    y: MeasurementVector,
    value=None,
    value_filter: bool = True,
    common_bits: bool = False,
) -> PartialLabel | Conflict:
    """Build a label conforming to every summary in ``rows``, then complete it."""
    ws = _Workspace(y, value_filter)
    b = ws.pin(rows)
    if isinstance(b, Conflict) or b.complete:
        return b
    out, _ = ws.complete(b, value, common_bits)
    return out


def decode_ssii(
    y: MeasurementVector,
    limits: DecodeLimits | None = None,
    *,
    value_filter: bool = True,
    common_bits: bool = False,
) -> DecodeResult:
    cb = y.codebook
    ws = _Workspace(y, value_filter)
    limit = (limits or DecodeLimits()).iterations_for(y)
    found: dict[int, float] = {}
    iterations = 0
    # A failed group stays failed while its own rows and the candidate rows
    # it inspected are unchanged (residual values only shrink), so skipping
    # it is equivalent to retrying it on every pass.
    cacheable = y.nonnegative and y.mode.exact
    failed: dict[float, tuple[int, ...]] = {}
    watchers: dict[int, set[float]] = {}

    def forget(value):
        for r in failed.pop(value, ()):
            w = watchers.get(r)
            if w is not None:
                w.discard(value)

    def result(status, message=""):
        sig = SparseSignal(cb.n, tuple(found.items()), y.mode, y.nonnegative)
        return DecodeResult(sig, status, iterations, ws.y.values, message)

    while not ws.is_zero():
        if iterations >= limit:
            return result(PARTIAL, f"iteration limit {limit} reached")
        iterations += 1
        progressed = False
        for value, rows in ws.value_groups(skip=failed):
            b = ws.pin(rows)
            watched: list[int] = []
            if not isinstance(b, Conflict) and not b.complete:
                b, watched = ws.complete(b, value, common_bits)
            if (
                isinstance(b, Conflict)
                or not b.complete
                or b.bits in found
                or not ws.acceptable(b.bits, value)
            ):
                if cacheable:
                    deps = tuple(rows) + tuple(watched)
                    failed[value] = deps
                    for r in deps:
                        watchers.setdefault(r, set()).add(value)
                continue
            try:
                changed = ws.subtract(b.bits, value)
            except ContradictionError as exc:
                return result(CONTRADICTION, str(exc))
            found[b.bits] = value
            if failed:
                for r, old in changed:
                    if old in failed:
                        forget(old)
                    new = ws.val.get(r, 0)
                    if new in failed:
                        forget(new)
                    w = watchers.pop(r, None)
                    if w:
                        for v in list(w):
                            forget(v)
            progressed = True
            break
        if not progressed:
            return result(PARTIAL, "no value group yields a complete label")

    out = result(SUCCESS)
    if not y.agrees_with(encode_values(out.recovered, cb)):
        out.status = CONTRADICTION
        out.message = "re-encoding the recovered signal does not reproduce y"
    return out
