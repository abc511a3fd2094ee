"""Deterministic Monte-Carlo experiments over random codebooks and signals.

Every trial draws its own codebook and signal from a seed derived from the
master seed and the grid coordinates ``(n, k, d, m, trial, algorithm)``, so
a grid point's outcome never depends on which other points were run, in
which order, or on how many worker processes shared the work.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .basis_pursuit import solve_bp
from .codebook import Codebook, complete_codebook, random_codebook
from .errors import CapacityError, InvalidArgument
from .io import infer_mode, measurements_from_rows, read_measurement_rows
from .measurements import MeasurementVector, encode, encode_values
from .mixmatch import StackedCodebook, decode_mm, encode_stacked
from .signal import EXACT, SparseSignal, ValueMode, generate
from .ssii import decode_ssii

ALGORITHMS = ("ssii", "mm", "bp")
CSV_HEADER = ["n", "N", "k", "d", "m", "M", "successes", "trials", "rate", "oversampling", "seconds"]
DEFAULT_TRIALS = 50
DEFAULT_THRESHOLD = 0.9
BP_RTOL = 1e-6


@dataclass(frozen=True)
class CodebookSpec:
    """How a trial obtains its codebook: ``complete`` or freshly ``random``."""

    kind: str
    d: int
    m: int | None = None
    distinct: bool = True

    def __post_init__(self):
        if self.kind not in ("complete", "random"):
            raise InvalidArgument(f"unknown codebook kind {self.kind!r}")
        if self.kind == "random" and (self.m is None or self.m < 1):
            raise InvalidArgument("random codebooks need m >= 1")

    def build(self, n: int, seed) -> Codebook:
        if self.kind == "complete":
            return complete_codebook(n, self.d)
        return random_codebook(n, self.d, self.m, seed, self.distinct)

    def m_for(self, n: int) -> int:
        return math.comb(n, self.d) if self.kind == "complete" else self.m


@dataclass
class TrialOutcome:
    success: bool
    status: str
    rows: int
    capacity_error: bool = False
    unsound: bool = False


def trial_seed(master: int, n: int, k: int, d: int, m: int, trial: int, algorithm: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, n, k, d, m, trial, ALGORITHMS.index(algorithm)])


def _recovered_ok(recovered: SparseSignal, planted: SparseSignal, algorithm: str) -> bool:
    if algorithm == "bp":
        return recovered.matches(planted, BP_RTOL)
    return recovered.matches(planted)


def run_trial(
    n: int,
    k: int,
    spec: CodebookSpec,
    algorithm: str,
    seed,
    mode: ValueMode = EXACT,
) -> TrialOutcome:
    """Generate, encode, decode; success iff the planted signal comes back."""
    if algorithm not in ALGORITHMS:
        raise InvalidArgument(f"unknown algorithm {algorithm!r}")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    cb_seed, sig_seed = seed.spawn(2)
    planted = generate(n, k, mode, sig_seed)
    try:
        if algorithm == "mm":
            stacked = StackedCodebook(spec.build(n, cb_seed), complete_codebook(n, 1))
            y = encode_stacked(planted, stacked)
            rows = stacked.rows
            result = decode_mm(y)
            sound = result.success and (
                y.y1.agrees_with(encode_values(result.recovered, stacked.part1))
                and y.y2.agrees_with(encode_values(result.recovered, stacked.part2))
            )
            status, recovered = result.status, result.recovered
        else:
            cb = spec.build(n, cb_seed)
            rows = cb.rows
            y = encode(planted, cb)
            if algorithm == "ssii":
                result = decode_ssii(y)
                status, recovered = result.status, result.recovered
            else:
                recovered = solve_bp(y)
                status = "success"
            sound = status == "success" and _sound(y, recovered)
    except CapacityError:
        return TrialOutcome(False, "capacity", 0, capacity_error=True)
    success = status == "success" and _recovered_ok(recovered, planted, algorithm)
    return TrialOutcome(success, status, rows, unsound=status == "success" and not sound)


def _sound(y: MeasurementVector, recovered: SparseSignal) -> bool:
    again = encode_values(recovered, y.codebook)
    if y.mode.exact and recovered.mode.exact:
        return y.agrees_with(again)
    scale = max(float(np.abs(y.values).max(initial=0.0)), 1e-300)
    return bool(np.all(np.abs(y.values.astype(float) - again) <= 1e-6 * scale))


@dataclass
class PointResult:
    n: int
    k: int
    d: int
    m: int
    M: int
    successes: int
    trials: int
    seconds: float
    capacity_errors: int = 0
    unsound: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


def _trial_job(args):
    n, k, spec, algorithm, seed, mode = args
    return run_trial(n, k, spec, algorithm, seed, mode)


@dataclass
class Runner:
    """Evaluates grid points; memoises them and optionally fans trials out."""

    master_seed: int
    algorithm: str = "ssii"
    trials: int = DEFAULT_TRIALS
    mode: ValueMode = EXACT
    workers: int = 1
    cache: dict = field(default_factory=dict, repr=False)
    _pool: ProcessPoolExecutor | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument("trials must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgument(f"unknown algorithm {self.algorithm!r}")

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def point(self, n: int, k: int, spec: CodebookSpec, need: int | None = None) -> PointResult:
        """Run (or recall) one grid point.

        With ``need`` the point stops as soon as more than ``trials - need``
        trials have failed, since it can no longer reach ``need`` successes;
        the result then counts only the trials up to that failure. The cut
        is taken in trial order, so it does not depend on ``workers``.
        """
        key = (n, k, spec)
        hit = self.cache.get(key)
        if hit is not None and (hit.trials == self.trials or (need is not None and hit.successes < need)):
            return hit
        m_key = spec.m_for(n)
        jobs = [
            (n, k, spec, self.algorithm,
             trial_seed(self.master_seed, n, k, spec.d, m_key, t, self.algorithm), self.mode)
            for t in range(self.trials)
        ]
        allowed = self.trials - need if need is not None else self.trials
        start = time.perf_counter()
        outcomes: list[TrialOutcome] = []
        failures = 0
        step = max(1, self.workers) * 2 if self.workers > 1 else 1
        for lo in range(0, len(jobs), step):
            batch = jobs[lo:lo + step]
            if self.workers > 1:
                if self._pool is None:
                    self._pool = ProcessPoolExecutor(self.workers)
                outs = list(self._pool.map(_trial_job, batch))
            else:
                outs = [_trial_job(j) for j in batch]
            for o in outs:
                outcomes.append(o)
                failures += not o.success
                if failures > allowed:
                    break
            if failures > allowed:
                break
        seconds = time.perf_counter() - start
        rows = max((o.rows for o in outcomes), default=0)
        res = PointResult(
            n, k, spec.d, m_key, rows,
            sum(o.success for o in outcomes), len(outcomes), seconds,
            sum(o.capacity_error for o in outcomes), sum(o.unsound for o in outcomes),
        )
        self.cache[key] = res
        return res

    def unsound_total(self) -> int:
        return sum(r.unsound for r in self.cache.values())


@dataclass
class ExperimentRow:
    n: int
    k: int
    d: int | None
    m: int | None
    M: int | None
    successes: int
    trials: int
    seconds: float = 0.0

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def attained(self) -> bool:
        return self.M is not None

    @property
    def oversampling(self) -> float | None:
        return None if self.M is None or self.k == 0 else self.M / self.k

    @classmethod
    def from_point(cls, p: PointResult) -> ExperimentRow:
        return cls(p.n, p.k, p.d, p.m, p.M, p.successes, p.trials, p.seconds)


def auto_d_range(n: int, k: int) -> list[int]:
    top = min(n - 1, math.ceil(math.log2(max(k, 1))) + 3)
    return list(range(2, top + 1)) if top >= 2 else [1]


def minimal_m(
    runner: Runner,
    n: int,
    k: int,
    d: int,
    threshold: float,
    m_cap: int,
    distinct: bool = True,
    prune: int | None = None,
):
    """Smallest m in [1, m_cap] whose success rate reaches ``threshold``.

    Exponential search for a passing m, binary search below it, then a
    downward verification walk in case the rate is not monotone in m.
    Returns the passing :class:`PointResult` or ``None``.

    ``prune`` abandons the exponential phase once every m still to be
    tried exceeds it. It never changes which points are visited before
    that, so with a noisy, non-monotone rate the search finds the same
    answer as without pruning whenever that answer is at most ``prune``.
    """
    if m_cap < 1 or (prune is not None and prune < 1):
        return None

    need = math.ceil(threshold * runner.trials - 1e-9)

    def test(m):
        p = runner.point(n, k, CodebookSpec("random", d, m, distinct), need)
        return p if p.successes >= need else None

    lo, hi = 0, 1
    hit = None
    while True:
        hit = test(hi)
        if hit is not None:
            break
        if hi >= m_cap or (prune is not None and hi >= prune):
            return None
        lo, hi = hi, min(2 * hi, m_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        p = test(mid)
        if p is not None:
            hi, hit = mid, p
        else:
            lo = mid
    while hi > 1:
        p = test(hi - 1)
        if p is None:
            break
        hi, hit = hi - 1, p
    return hit


def oversampling_curve(
    runner: Runner,
    n_values: Sequence[int],
    k_values: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
    d_values: Sequence[int] | None = None,
) -> list[ExperimentRow]:
    """Minimal M over d reaching the success threshold, per (n, k)."""
    if not 0 < threshold <= 1:
        raise InvalidArgument(f"threshold {threshold} outside (0, 1]")
    rows = []
    for n in n_values:
        for k in k_values:
            best: PointResult | None = None
            last: PointResult | None = None
            # widest summaries first: they reach the threshold with few
            # subsets, and the resulting M prunes the search at smaller d
            for d in sorted(d_values or auto_d_range(n, k), reverse=True):
                if not 1 <= d <= n:
                    continue
                extra = 2 * n if runner.algorithm == "mm" else 0
                cap = math.comb(n, d)
                prune = None if best is None else (best.M - extra - 1) >> d
                p = minimal_m(runner, n, k, d, threshold, cap, prune=prune)
                if p is not None and (best is None or p.M < best.M):
                    best = p
                if p is None and best is None:
                    last = runner.cache.get((n, k, CodebookSpec("random", d, cap)), last)
            if best is not None:
                rows.append(ExperimentRow.from_point(best))
            else:
                fail = last or PointResult(n, k, 0, 0, 0, 0, runner.trials, 0.0)
                rows.append(ExperimentRow(n, k, None, None, None, fail.successes, fail.trials, fail.seconds))
    return rows


def success_prob_curve(
    runner: Runner,
    n: int,
    M_values: Sequence[int],
    k_values: Sequence[int],
    d_values: Sequence[int] | None = None,
) -> list[ExperimentRow]:
    """Success rate per (M, k); each row is the best d with m = floor(M / 2^d)."""
    rows = []
    extra = 2 * n if runner.algorithm == "mm" else 0
    for M in M_values:
        for k in k_values:
            best: PointResult | None = None
            for d in (d_values or auto_d_range(n, k)):
                if not 1 <= d <= n:
                    continue
                m = min((M - extra) >> d, math.comb(n, d))
                if m < 1:
                    continue
                p = runner.point(n, k, CodebookSpec("random", d, m))
                if best is None or p.successes > best.successes:
                    best = p
            if best is None:
                rows.append(ExperimentRow(n, k, None, None, None, 0, runner.trials))
            else:
                rows.append(ExperimentRow.from_point(best))
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def write_rows(fh: IO[str], rows: Iterable[ExperimentRow], timing: bool = False) -> None:
    """CSV with the fixed header; ``seconds`` stays blank unless ``timing``.

    Leaving wall time out by default keeps output byte-identical across runs.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([
            r.n, r.N, r.k, _fmt(r.d), _fmt(r.m), _fmt(r.M), r.successes, r.trials,
            _fmt(r.rate), _fmt(r.oversampling), _fmt(r.seconds) if timing else "",
        ])


def ingest_summaries(fh: IO[str], n: int | None = None, allow_partial: bool = False, tol: float | None = None):
    """Codebook and measurement vector from an externally supplied summary CSV."""
    rows = read_measurement_rows(fh)
    if any(r.part is not None for r in rows):
        raise InvalidArgument("ingestion takes a single codebook; found a part column")
    y = measurements_from_rows(rows, n, None, allow_partial, infer_mode(rows, tol))
    return y.codebook, y
