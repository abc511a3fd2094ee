"""File formats: codebook and signal JSON, measurement CSV.

Positions in files are 1-based and labels/patterns are bitstrings with the
most significant bit first, matching the in-memory conventions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .codebook import Codebook, complete_codebook
from .errors import InvalidArgument
from .measurements import MeasurementVector
from .signal import EXACT, SparseSignal, ValueMode

MEASUREMENT_FIELDS = ["subset", "pattern", "value"]


# -- codebooks ---------------------------------------------------------------

def codebook_to_json(cb: Codebook) -> dict:
    return {"n": cb.n, "d": cb.d, "subsets": [list(s) for s in cb.subsets]}


def codebook_from_json(obj: dict) -> Codebook:
    try:
        n, d, subsets = int(obj["n"]), int(obj["d"]), obj["subsets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed codebook JSON: {exc}") from None
    return Codebook(n, d, tuple(tuple(int(p) for p in s) for s in subsets))


def save_codebook(cb: Codebook, path) -> None:
    with open(path, "w") as fh:
        json.dump(codebook_to_json(cb), fh)
        fh.write("\n")


def load_codebook(path) -> Codebook:
    with open(path) as fh:
        return codebook_from_json(json.load(fh))


# -- signals -----------------------------------------------------------------

def _bitstring(bits: int, n: int) -> str:
    return format(bits, f"0{n}b") if n else ""


def _parse_bits(text: str, n: int, what: str) -> int:
    if len(text) != n or any(ch not in "01" for ch in text):
        raise InvalidArgument(f"{what} {text!r} is not a {n}-bit bitstring")
    return int(text, 2) if n else 0


def signal_to_json(sig: SparseSignal) -> dict:
    entries = []
    for label, value in zip(sig.labels.tolist(), sig.values.tolist()):
        entries.append({"label": _bitstring(label, sig.n), "value": value})
    return {"n": sig.n, "mode": sig.mode.kind, "entries": entries}


def signal_from_json(obj: dict, tol: float | None = None) -> SparseSignal:
    try:
        n = int(obj["n"])
        kind = obj.get("mode", "int")
        raw = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed signal JSON: {exc}") from None
    mode = ValueMode(kind) if tol is None else ValueMode(kind, tol)
    entries = []
    for e in raw:
        value = e["value"]
        if mode.exact:
            if isinstance(value, float) and not value.is_integer():
                raise InvalidArgument(f"non-integer value {value} in int mode")
            value = int(value)
        else:
            value = float(value)
        entries.append((_parse_bits(str(e["label"]), n, "label"), value))
    return SparseSignal(n, tuple(entries), mode)


def save_signal(sig: SparseSignal, path) -> None:
    with open(path, "w") as fh:
        json.dump(signal_to_json(sig), fh)
        fh.write("\n")


def load_signal(path, tol: float | None = None) -> SparseSignal:
    with open(path) as fh:
        return signal_from_json(json.load(fh), tol)


# -- measurements ------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementRow:
    positions: tuple[int, ...]
    pattern: str
    value: int | float
    part: int | None = None


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_measurements(fh: IO[str], parts: Iterable[tuple[int | None, MeasurementVector]]) -> None:
    """Write one or more measurement vectors; a ``part`` column appears when tagged."""
    parts = list(parts)
    tagged = any(p is not None for p, _ in parts)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(MEASUREMENT_FIELDS + (["part"] if tagged else []))
    for part, y in parts:
        cb = y.codebook
        obs = y.observed()
        values = y.values.tolist()
        for i, subset in enumerate(cb.subsets):
            subset_text = ";".join(map(str, subset))
            for pattern in range(1 << cb.d):
                r = cb.row_index(i, pattern)
                if not obs[r]:
                    continue
                row = [subset_text, _bitstring(pattern, cb.d), _format_value(values[r])]
                if tagged:
                    row.append(str(part))
                writer.writerow(row)


def _parse_number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        raise InvalidArgument(f"cannot parse measurement value {text!r}") from None
    if not np.isfinite(v):
        raise InvalidArgument(f"measurement value {text!r} is not finite")
    return v


def read_measurement_rows(fh: IO[str]) -> list[MeasurementRow]:
    """Parse a measurement CSV.

    An optional ``weight`` column multiplies each value (for summaries given
    as averages over a known number of conforming items); an optional
    ``part`` column tags rows for stacked codebooks.
    """
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    missing = [f for f in MEASUREMENT_FIELDS if f not in fields]
    if missing:
        raise InvalidArgument(f"measurement CSV lacks columns {missing}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            positions = tuple(int(p) for p in rec["subset"].split(";") if p.strip())
        except ValueError:
            raise InvalidArgument(f"line {lineno}: bad subset {rec['subset']!r}") from None
        pattern = rec["pattern"].strip()
        value = _parse_number(rec["value"])
        if "weight" in fields and rec.get("weight", "").strip():
            value = value * _parse_number(rec["weight"])
        part = None
        if "part" in fields and rec.get("part", "").strip():
            part = int(rec["part"])
            if part not in (1, 2):
                raise InvalidArgument(f"line {lineno}: part must be 1 or 2, got {part}")
        rows.append(MeasurementRow(positions, pattern, value, part))
    return rows


def infer_mode(rows: list[MeasurementRow], tol: float | None) -> ValueMode:
    integral = all(
        isinstance(r.value, int) or float(r.value).is_integer() for r in rows
    )
    if integral and tol is None:
        return EXACT
    return ValueMode("real", tol if tol is not None else 1e-9)


def measurements_from_rows(
    rows: list[MeasurementRow],
    n: int | None = None,
    codebook: Codebook | None = None,
    allow_partial: bool = False,
    mode: ValueMode | None = None,
) -> MeasurementVector:
    """Assemble a measurement vector, inferring the codebook if none is given.

    Inferred codebooks keep the subsets in order of first appearance, so a
    file written by :func:`write_measurements` reads back to the same
    codebook. Rows absent from the file are an error unless
    ``allow_partial`` marks them missing.
    """
    if not rows:
        raise InvalidArgument("no measurement rows")
    sizes = {len(r.positions) for r in rows}
    if len(sizes) != 1:
        raise InvalidArgument(f"subsets of mixed sizes {sorted(sizes)}; a codebook has one width")
    d = sizes.pop()
    if codebook is None:
        if n is None:
            n = max(max(r.positions) for r in rows)
        order: dict[tuple[int, ...], None] = {}
        for r in rows:
            order.setdefault(r.positions, None)
        codebook = Codebook(n, d, tuple(order))
    elif codebook.d != d:
        raise InvalidArgument(f"rows have width {d}, codebook has d={codebook.d}")
    index = {s: i for i, s in enumerate(codebook.subsets)}
    if mode is None:
        mode = infer_mode(rows, None)
    dtype = np.int64 if mode.exact else np.float64
    values = np.zeros(codebook.rows, dtype=dtype)
    seen = np.zeros(codebook.rows, dtype=bool)
    for r in rows:
        i = index.get(r.positions)
        if i is None:
            raise InvalidArgument(f"subset {r.positions} is not in the codebook")
        pattern = _parse_bits(r.pattern, d, "pattern")
        row = codebook.row_index(i, pattern)
        if seen[row]:
            raise InvalidArgument(
                f"duplicate row for subset {';'.join(map(str, r.positions))} pattern {r.pattern}"
            )
        seen[row] = True
        values[row] = int(r.value) if mode.exact else float(r.value)
    if not seen.all() and not allow_partial:
        raise InvalidArgument(
            f"{int((~seen).sum())} of {codebook.rows} rows are absent; "
            "pass allow_partial to treat them as missing"
        )
    return MeasurementVector(codebook, values, mode, True, None if seen.all() else ~seen)


def read_measurements(
    fh: IO[str],
    n: int | None = None,
    codebook: Codebook | None = None,
    allow_partial: bool = False,
    tol: float | None = None,
) -> MeasurementVector:
    rows = read_measurement_rows(fh)
    if any(r.part is not None for r in rows):
        raise InvalidArgument("file has a part column; read it as a stacked file")
    return measurements_from_rows(rows, n, codebook, allow_partial, infer_mode(rows, tol))


def read_stacked(fh: IO[str], n: int | None = None, part1: Codebook | None = None):
    """Read a Mix-and-Match file: part 1 is the random block, part 2 the width-1 block."""
    from .mixmatch import StackedCodebook, StackedMeasurements

    rows = read_measurement_rows(fh)
    if any(r.part is None for r in rows):
        raise InvalidArgument("stacked measurement files need a part on every row")
    if n is None:
        n = part1.n if part1 is not None else max(max(r.positions) for r in rows)
    rows1 = [r for r in rows if r.part == 1]
    rows2 = [r for r in rows if r.part == 2]
    y1 = measurements_from_rows(rows1, n, part1, mode=EXACT)
    y2 = measurements_from_rows(rows2, n, complete_codebook(n, 1), mode=EXACT)
    stacked = StackedCodebook(y1.codebook, y2.codebook)
    return StackedMeasurements(stacked, y1, y2)
