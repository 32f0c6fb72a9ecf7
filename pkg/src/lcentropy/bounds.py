"""Closed-form bounds, thresholds, and existence searches.

Every function evaluates a printed formula or runs a monotone search; none
of them touches quadrature or convolution.  Preconditions follow the source
inequalities exactly (strict versus non-strict as printed) and are reported
as flags, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import closed_form_log_ratio
from .pmf import IntegerPmf, is_log_concave, stats

RATIO_EPSILON_DEFAULT = 0.2  # the epsilon used for the decay-factor checks


@dataclass(frozen=True)
class BoundEvaluation:
    name: str
    params: dict
    precondition_met: bool
    values: dict = field(default_factory=dict)
    witness: int | None = None
    flags: tuple[str, ...] = ()


def smoothing_gap_bound(n: int, sigma: float) -> BoundEvaluation:
    """Explicit bound on |h(S_n + U^(n)) - H(S_n)| for per-summand sigma.

    Valid once sigma exceeds max(2^(n+2), 3^7)/sqrt(n); the value is still
    reported (precondition flag false) outside that range.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    rs = math.sqrt(n) * sigma
    value = (
        2.0 ** (n + 6) * math.exp(-(rs ** 0.2)) * rs**3
        + 2.0 ** (n + 2) / rs * math.log(2.0 ** (n + 2) * rs)
        + math.log(n * sigma * sigma) / (8.0 * n * sigma * sigma)
    )
    met = sigma > max(2.0 ** (n + 2) / math.sqrt(n), 3.0**7 / math.sqrt(n))
    return BoundEvaluation(
        name="smoothing_gap_bound",
        params={"n": n, "sigma": sigma},
        precondition_met=met,
        values={"value": value},
    )


def entropy_tail_envelope(n: int, sigma: float) -> BoundEvaluation:
    """Bound on the entropy mass beyond 5*n*sigma^2 (continuous version;
    the discrete tail is checked against twice this value)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    rs = math.sqrt(n) * sigma
    value = 2.0 ** (n + 4) * math.exp(-(rs ** 0.2)) * rs**3
    return BoundEvaluation(
        name="entropy_tail_envelope",
        params={"n": n, "sigma": sigma},
        precondition_met=rs > 3.0**7,
        values={"value": value, "threshold": 5.0 * n * sigma * sigma},
    )


def epi_entropy_threshold(n: int, epsilon: float) -> BoundEvaluation:
    """Entropy of one summand sufficient for the n-step EPI defect epsilon.

    Returns log(2/eps) + log log(2/eps) + n + 27 nats.  For eps >= 2/e the
    inner logarithm is at most 1 and the double log non-positive; the value
    is still returned, flagged.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    inner = math.log(2.0 / epsilon)
    flags = ()
    if inner <= 1.0:
        flags = ("loglog-argument-at-most-one",)
    value = inner + math.log(inner) + n + 27.0
    return BoundEvaluation(
        name="epi_entropy_threshold",
        params={"n": n, "epsilon": epsilon},
        precondition_met=True,
        values={"value": value},
        flags=flags,
    )


def pmax_bounds(sigma: float) -> BoundEvaluation:
    """Two-sided bound 1/(4 sigma) <= pmax <= 1/sigma, valid for sigma^2 >= 1."""
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    met = sigma >= 1.0
    values = {}
    if met:
        values = {"lower": 1.0 / (4.0 * sigma), "upper": 1.0 / sigma}
    return BoundEvaluation(
        name="pmax_bounds",
        params={"sigma": sigma},
        precondition_met=met,
        values=values,
    )


def mode_location_window(mu: float, sigma: float, delta: float) -> BoundEvaluation:
    """Open window (mu - sigma^(3/2+delta) - 1, mu + sigma^(3/2+delta) + 1)
    containing the last mode, valid for sigma > 4^(1/(2 delta))."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    met = sigma > 4.0 ** (1.0 / (2.0 * delta))
    half = sigma ** (1.5 + delta) + 1.0
    return BoundEvaluation(
        name="mode_location_window",
        params={"mu": mu, "sigma": sigma, "delta": delta},
        precondition_met=met,
        values={"low": mu - half, "high": mu + half},
    )


def ratio_decay_factor(sigma: float, epsilon: float) -> float:
    """theta = 1 - sigma^(-(2 - epsilon)), the certified one-step decay."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if sigma <= 1.0:
        raise ValueError("sigma must exceed 1")
    return 1.0 - sigma ** (-(2.0 - epsilon))


def ratio_decay_sigma_threshold(epsilon: float) -> float:
    """Sigma above which the decay onset is guaranteed to exist in-window."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    return max(3.0 ** (1.0 / epsilon), (12.0 * math.e**3) ** (1.0 / (1.0 - 2.0 * epsilon)))


@dataclass(frozen=True)
class DecayOnsetResult:
    """Outcome of the search for the index where ratios drop below theta."""

    found: bool
    witness: int | None
    theta: float
    window: tuple[int, int]
    side: str
    method: str  # stored | closed-form | support-edge | none
    partial: bool  # window extends beyond what could be searched
    sigma: float


def find_ratio_decay_onset(
    p: IntegerPmf, epsilon: float, side: str = "right"
) -> DecayOnsetResult:
    """First index in {nmax, ..., nmax + 2*ceil(sigma^2)} whose outward
    probability ratio is at most theta (side="left" mirrors downward).

    Ratios are monotone for log-concave pmfs, so the first qualifying index
    certifies all later ones and binary search applies.  Stored log weights
    cover the window where available; family provenance supplies closed-form
    ratios beyond it, otherwise the search is flagged partial.
    """
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    st = stats(p)
    sigma = st.sigma
    if sigma <= 1.0:
        raise ValueError("ratio decay search needs sigma > 1")
    if not is_log_concave(p, rel_tol=1e-9,
                          min_weight=4e9 * p.weight_abs_error).is_log_concave:
        raise ValueError("ratio decay search needs a log-concave pmf")
    theta = ratio_decay_factor(sigma, epsilon)
    log_theta = math.log(theta)

    # widen by one when the certified variance error could flip the ceiling
    width = 2 * math.ceil(st.variance)
    if math.ceil(st.variance + st.variance_error) != math.ceil(
        max(st.variance - st.variance_error, 0.0)
    ):
        width += 2
    if side == "right":
        window = (st.nmax, st.nmax + width)
    else:
        window = (st.nmax - width, st.nmax)

    lo, hi = p.support
    exact_tails = p.tail_mass_bound == 0.0
    closed = closed_form_log_ratio(p)

    def log_ratio(k: int) -> float:
        # outward ratio at k: p(k+1)/p(k) rightward, p(k-1)/p(k) leftward
        if side == "right":
            if lo <= k < hi:
                return float(p.log_weights[k + 1 - lo] - p.log_weights[k - lo])
            if k == hi and exact_tails:
                return -math.inf  # true support edge
        else:
            if lo < k <= hi:
                return float(p.log_weights[k - 1 - lo] - p.log_weights[k - lo])
            if k == lo and exact_tails:
                return -math.inf
        if closed is not None:
            return closed(k) if side == "right" else -closed(k - 1)
        return math.nan

    def qualifies(k: int) -> bool:
        r = log_ratio(k)
        return not math.isnan(r) and r <= log_theta

    # the predicate is monotone along the search direction, so locate the
    # first qualifying index by bisection over the searchable span
    step = 1 if side == "right" else -1
    first = st.nmax
    span = width
    if closed is not None:
        search_span = span
    elif side == "right":
        k_edge = hi if exact_tails else hi - 1
        search_span = min(span, k_edge - first)
    else:
        k_edge = lo if exact_tails else lo + 1
        search_span = min(span, first - k_edge)
    if search_span < 0:
        return DecayOnsetResult(
            found=False, witness=None, theta=theta, window=window,
            side=side, method="none", partial=True, sigma=sigma,
        )

    k_end = first + step * search_span
    best: int | None = None
    if qualifies(first):
        best = first
    elif search_span > 0 and qualifies(k_end):
        lo_pos, hi_pos = 0, search_span
        while hi_pos - lo_pos > 1:
            mid = (lo_pos + hi_pos) // 2
            if qualifies(first + step * mid):
                hi_pos = mid
            else:
                lo_pos = mid
        best = first + step * hi_pos

    partial = best is None and search_span < span
    method = "none"
    if best is not None:
        if math.isinf(log_ratio(best)):
            method = "support-edge"
        elif closed is not None and not (lo <= best <= hi):
            method = "closed-form"
        else:
            method = "stored"
    return DecayOnsetResult(
        found=best is not None,
        witness=best,
        theta=theta,
        window=window,
        side=side,
        method=method,
        partial=partial,
        sigma=sigma,
    )


def xlogx_increment_bound(
    a: float, b: float, mu: float, big_d: float, big_m: float
) -> tuple[float, float]:
    """(lhs, rhs) of the increment estimate for G(x) = -x log x - x log M.

    lhs = |G(b) - G(a)|; rhs = (2 mu / M) log(1/mu) + |b - a| (log(1/mu) +
    log(e D)).  Preconditions: D, M >= 1; 0 <= a, b <= D/M; 0 < mu < 1/e.
    """
    if big_d < 1.0 or big_m < 1.0:
        raise ValueError("D and M must be at least 1")
    if not 0.0 < mu < 1.0 / math.e:
        raise ValueError("mu must lie in (0, 1/e)")
    hi = big_d / big_m
    if not (0.0 <= a <= hi and 0.0 <= b <= hi):
        raise ValueError("a and b must lie in [0, D/M]")

    def g(x: float) -> float:
        if x == 0.0:
            return 0.0
        return -x * math.log(x) - x * math.log(big_m)

    lhs = abs(g(b) - g(a))
    rhs = (2.0 * mu / big_m) * math.log(1.0 / mu) + abs(b - a) * (
        math.log(1.0 / mu) + 1.0 + math.log(big_d)
    )
    return lhs, rhs


def xlogx_increment_bound_batch(
    a: np.ndarray, b: np.ndarray, mu: np.ndarray, big_d: np.ndarray, big_m: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (lhs, rhs) for randomized sweeps; inputs assumed valid."""
    def g(x, m):
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = -x[pos] * np.log(x[pos]) - x[pos] * np.log(m[pos])
        return out

    lhs = np.abs(g(b, big_m) - g(a, big_m))
    rhs = (2.0 * mu / big_m) * np.log(1.0 / mu) + np.abs(b - a) * (
        np.log(1.0 / mu) + 1.0 + np.log(big_d)
    )
    return lhs, rhs
