"""Recovery-guarantee formulas for summary codebooks.

All probability outputs come in two flavours: ``raw`` is the formula as
written (it may leave [0, 1] or be vacuous), the plain field is clamped to
[0, 1]. Raw values that overflow double precision saturate at the largest
finite float so that reports stay finite.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass

from .errors import InvalidArgument

DEFAULT_ALPHA = 0.1
DEFAULT_LAMBDA = 0.9
_BIG = sys.float_info.max


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _finite(x: float) -> float:
    if math.isnan(x):
        return x
    return max(-_BIG, min(_BIG, x))


def _pow(base: float, m: int) -> float:
    """``base ** m`` saturating at the largest float instead of overflowing."""
    if base == 0.0:
        return 0.0 if m > 0 else 1.0
    if base < 0:
        mag = _pow(-base, m)
        return -mag if m % 2 else mag
    lg = m * math.log(base)
    if lg > math.log(_BIG):
        return _BIG
    return math.exp(lg)


@dataclass(frozen=True)
class BoundParams:
    n: int
    d: int
    m: int
    k: int
    alpha: float = DEFAULT_ALPHA
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not 1 <= self.d <= self.n:
            raise InvalidArgument(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if self.m < 0:
            raise InvalidArgument(f"m={self.m} must be nonnegative")
        if self.k < 1:
            raise InvalidArgument(f"k={self.k} must be at least 1")
        if not 0 < self.alpha < 0.5:
            raise InvalidArgument(f"alpha={self.alpha} outside (0, 1/2)")
        if not 0 < self.lam < 1:
            raise InvalidArgument(f"lambda={self.lam} outside (0, 1)")


def binom_ratio(top: float, n: int, l: int, gamma: bool = False) -> float:
    """C(top, l) / C(n, l).

    ``top`` is floored unless ``gamma`` is set, in which case the binomial
    with a real upper argument is used (falling factorial over l!).
    """
    if l < 0 or l > n:
        raise InvalidArgument(f"need 0 <= l <= n, got l={l}, n={n}")
    if not gamma:
        t = math.floor(top)
        if t < l:
            return 0.0
        return math.exp(
            math.lgamma(t + 1) - math.lgamma(t - l + 1)
            - math.lgamma(n + 1) + math.lgamma(n - l + 1)
        )
    ratio = 1.0
    for i in range(l):
        ratio *= (top - i) / (n - i)
    return ratio


def lemma_eps_p(n: int, l: int, k: int, alpha: float, gamma: bool = False) -> tuple[float, float]:
    """Unique-summary fraction and its probability for k random n-bit labels.

    eps = 1 - k C(n/2 (1 + sqrt(2 alpha)), l) / C(n, l), p = 1 - k^2 exp(-alpha n).
    """
    if not 0 < alpha < 0.5:
        raise InvalidArgument(f"alpha={alpha} outside (0, 1/2)")
    top = n / 2 * (1 + math.sqrt(2 * alpha))
    eps = 1.0 - k * binom_ratio(top, n, l, gamma)
    p = 1.0 - k * k * math.exp(-alpha * n)
    return eps, p


def f_s_lower(l: int) -> int:
    """Sparsity certified for strong recovery with width-l summaries."""
    if l < 0:
        raise InvalidArgument(f"l={l} must be nonnegative")
    return 1 << l


def ssii_failure_raw(params: BoundParams, gamma: bool = False) -> float:
    n, d, m, k = params.n, params.d, params.m, params.k
    eps, p = lemma_eps_p(n - 1, d - 1, k, params.alpha, gamma)
    return _finite(k * n * (1 - p + p * _pow(1 - eps * d / n, m)))


def _estimate_holds(eps: float, p: float) -> bool:
    # outside these ranges the unique-summary estimate says nothing and the composed
    # formula can land anywhere, including on the "good" side of [0, 1]
    return p > 0 and eps >= 0


def ssii_failure_bound(params: BoundParams, gamma: bool = False) -> float:
    """Upper bound on SSII failure probability over a random (m, n, d) codebook.

    Returns the vacuous value 1 when the underlying (eps, p) are not
    probabilities.
    """
    eps, p = lemma_eps_p(params.n - 1, params.d - 1, params.k, params.alpha, gamma)
    if not _estimate_holds(eps, p):
        return 1.0
    return _clamp(ssii_failure_raw(params, gamma))


def mm_success_raw(params: BoundParams, gamma: bool = False) -> float:
    eps, p = lemma_eps_p(params.n, params.d, params.k, params.alpha, gamma)
    return _finite(p * (1 - params.k * _pow(1 - eps, params.m)))


def mm_success_bound(params: BoundParams, gamma: bool = False) -> float:
    """Lower bound on Mix-and-Match success probability (0 when vacuous)."""
    eps, p = lemma_eps_p(params.n, params.d, params.k, params.alpha, gamma)
    if not _estimate_holds(eps, p):
        return 0.0
    return _clamp(mm_success_raw(params, gamma))


def k_of_lambda(lam: float, d: int, alpha: float) -> float:
    # log2(sqrt(alpha/2) + 1/2) is negative on (0, 1/2), so this grows with d
    return lam * 2.0 ** (-d * math.log2(math.sqrt(alpha / 2) + 0.5))


def explicit_rates(params: BoundParams) -> tuple[float, float, float]:
    """Closed-form failure bounds for SSII and Mix-and-Match, and k(lambda).

    The failure expressions are evaluated at ``params.k``; they were derived
    for k equal to the returned k(lambda).
    """
    n, d, m, k, a, lam = params.n, params.d, params.m, params.k, params.alpha, params.lam
    ssii = _finite(k**3 * n * math.exp(-a * n) + k * n * _pow(1 - (1 - lam) * d / n, m))
    mm = _finite(k * k * math.exp(-a * n) + k * _pow(lam, m))
    return ssii, mm, k_of_lambda(lam, d, a)


def bp_measurement_formula(N: int, k: int) -> float:
    """Measurements of a complete codebook certified for sparsity k: 2k C(log N, log k)."""
    if N < 1 or k < 1:
        raise InvalidArgument(f"need N, k >= 1, got N={N}, k={k}")
    log_n = round(math.log2(N))
    log_k = round(math.log2(k))
    if log_k > log_n:
        raise InvalidArgument(f"log2 k={log_k} exceeds log2 N={log_n}")
    return float(2 * k * math.comb(log_n, log_k))


@dataclass(frozen=True)
class BoundReport:
    n: int
    d: int
    m: int
    k: int
    alpha: float
    lam: float
    epsilon: float
    p: float
    ssii_epsilon: float
    ssii_p: float
    ssii_failure: float
    ssii_failure_raw: float
    mm_success: float
    mm_success_raw: float
    ssii_failure_explicit: float
    ssii_failure_explicit_raw: float
    mm_failure_explicit: float
    mm_failure_explicit_raw: float
    k_of_lambda: float
    bp_measurements: float | None
    ssii_measurement_scale: float
    mm_measurement_scale: float
    ssii_failure_gamma: float
    mm_success_gamma: float

    def as_dict(self) -> dict:
        return asdict(self)


def report(params: BoundParams) -> BoundReport:
    n, d, m, k = params.n, params.d, params.m, params.k
    eps, p = lemma_eps_p(n, d, k, params.alpha)
    s_eps, s_p = lemma_eps_p(n - 1, d - 1, k, params.alpha)
    s_raw = ssii_failure_raw(params)
    mm_raw = mm_success_raw(params)
    ssii_x, mm_x, k_lam = explicit_rates(params)
    try:
        bp = bp_measurement_formula(1 << n, k)
    except InvalidArgument:
        bp = None
    return BoundReport(
        n=n, d=d, m=m, k=k, alpha=params.alpha, lam=params.lam,
        epsilon=eps, p=p, ssii_epsilon=s_eps, ssii_p=s_p,
        ssii_failure=ssii_failure_bound(params), ssii_failure_raw=s_raw,
        mm_success=mm_success_bound(params), mm_success_raw=mm_raw,
        ssii_failure_explicit=_clamp(ssii_x), ssii_failure_explicit_raw=ssii_x,
        mm_failure_explicit=_clamp(mm_x), mm_failure_explicit_raw=mm_x,
        k_of_lambda=k_lam,
        bp_measurements=bp,
        ssii_measurement_scale=k * n * math.log2(n) if n > 1 else 0.0,
        mm_measurement_scale=2 * n + k * math.log2(k),
        ssii_failure_gamma=ssii_failure_bound(params, gamma=True),
        mm_success_gamma=mm_success_bound(params, gamma=True),
    )
