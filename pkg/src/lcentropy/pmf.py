"""Integer pmfs on a contiguous window with a certified truncation ledger.

An IntegerPmf stores weights for a contiguous integer window plus upper
bounds on the probability mass outside it.  Family constructors (see
families.py) certify those bounds with a geometric-tail argument, which also
yields closed-form bounds on the entropy, mean and variance contributions of
the discarded tails.  All reductions run through compensated summation
kernels so the identity checks downstream resolve at the 1e-12 scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from . import _kernels as K

DEFAULT_TAIL_TOL = 1e-14
MAX_WINDOW = 1 << 24

_NORM_SLACK = 1e-15  # |stored mass + tail bound - 1| must stay below this


class WindowCapError(RuntimeError):
    """Raised when a window would grow past the configured memory cap."""


@dataclass(frozen=True)
class IntegerPmf:
    """Truncated pmf: ``weights[i]`` is the probability of ``offset + i``.

    tail_mass_left/right are certified upper bounds on the mass below/above
    the stored window.  ``geometric_tails`` records whether the construction
    guarantees at-least-geometric decay beyond both edges (true for
    log-concave families and their convolutions), which is what makes the
    closed-form tail certificates valid.  ``weight_rel_error`` and
    ``weight_abs_error`` bound the per-weight floating-point error of the
    construction and feed the certified error of every statistic.
    """

    offset: int
    weights: np.ndarray
    log_weights: np.ndarray
    tail_mass_left: float
    tail_mass_right: float
    geometric_tails: bool
    provenance: dict
    weight_rel_error: float = 1e-14
    weight_abs_error: float = 0.0
    mass_deficit: float = 0.0  # unaccounted mass with no placement certificate

    @property
    def tail_mass_bound(self) -> float:
        return self.tail_mass_left + self.tail_mass_right + self.mass_deficit

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def support(self) -> tuple[int, int]:
        return self.offset, self.offset + self.size - 1

    def prob(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.size:
            return float(self.weights[i])
        return 0.0

    def shifted(self, m: int) -> "IntegerPmf":
        """Same distribution translated by m (entropy-preserving)."""
        return IntegerPmf(
            offset=self.offset + m,
            weights=self.weights,
            log_weights=self.log_weights,
            tail_mass_left=self.tail_mass_left,
            tail_mass_right=self.tail_mass_right,
            geometric_tails=self.geometric_tails,
            provenance=dict(self.provenance, shifted_by=m),
            weight_rel_error=self.weight_rel_error,
            weight_abs_error=self.weight_abs_error,
            mass_deficit=self.mass_deficit,
        )


def from_weights(
    offset: int,
    weights,
    *,
    log_weights=None,
    tail_mass_left: float = 0.0,
    tail_mass_right: float = 0.0,
    geometric_tails: bool = False,
    provenance: dict | None = None,
    weight_rel_error: float = 1e-14,
    weight_abs_error: float = 0.0,
    mass_deficit: float = 0.0,
    normalize: bool = False,
) -> IntegerPmf:
    """Build an IntegerPmf, trimming zero padding and enforcing invariants.

    With ``normalize=True`` the stored weights are rescaled so that their
    compensated sum equals 1 minus the tail bounds; otherwise the input must
    already satisfy that balance to within 1e-15.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if not np.isfinite(w).all() or (w < 0.0).any():
        raise ValueError("weights must be finite and nonnegative")
    if tail_mass_left < 0.0 or tail_mass_right < 0.0:
        raise ValueError("tail mass bounds must be nonnegative")
    if w.size > MAX_WINDOW:
        raise WindowCapError(f"window of {w.size} weights exceeds cap {MAX_WINDOW}")

    pos = np.flatnonzero(w > 0.0)
    if pos.size == 0:
        raise ValueError("pmf has no positive mass")
    lo, hi = int(pos[0]), int(pos[-1])
    w = w[lo : hi + 1]
    offset += lo
    if log_weights is not None:
        lw = np.ascontiguousarray(log_weights, dtype=np.float64)[lo + 0 : hi + 1]
        if lw.shape != w.shape:
            raise ValueError("log_weights shape mismatch")
        lw = lw.copy()
    else:
        with np.errstate(divide="ignore"):
            lw = np.log(w)

    if mass_deficit < 0.0:
        raise ValueError("mass deficit must be nonnegative")
    target = 1.0 - tail_mass_left - tail_mass_right - mass_deficit
    if target <= 0.0:
        raise ValueError("tail mass bounds leave no stored mass")
    s = K.sum_comp(w)
    if normalize:
        if s <= 0.0:
            raise ValueError("cannot normalize zero-mass pmf")
        scale = target / s
        w = w * scale
        lw = lw + math.log(scale)
        s = K.sum_comp(w)
    if abs(s + tail_mass_left + tail_mass_right + mass_deficit - 1.0) > _NORM_SLACK:
        raise ValueError(
            f"stored mass {s!r} plus tail bound is not within {_NORM_SLACK} of 1"
        )

    w.flags.writeable = False
    lw.flags.writeable = False
    return IntegerPmf(
        offset=int(offset),
        weights=w,
        log_weights=lw,
        tail_mass_left=float(tail_mass_left),
        tail_mass_right=float(tail_mass_right),
        geometric_tails=bool(geometric_tails),
        provenance=provenance if provenance is not None else {"family": "custom"},
        weight_rel_error=float(weight_rel_error),
        weight_abs_error=float(weight_abs_error),
        mass_deficit=float(mass_deficit),
    )


# ---------------------------------------------------------------------------
# tail certificates
# ---------------------------------------------------------------------------

def _edge_geometry(p: IntegerPmf, side: str) -> tuple[float, float] | None:
    """(edge value, outward ratio) bounds at one window edge, noise-inflated.

    Valid as a bound on everything beyond the edge only when the underlying
    distribution decays at least geometrically there (``geometric_tails``).
    Returns None when no usable certificate exists.
    """
    w, lw = p.weights, p.log_weights
    if w.size < 2:
        return None
    if side == "right":
        e, inner = w[-1], w[-2]
        log_ratio = lw[-1] - lw[-2]
    else:
        e, inner = w[0], w[1]
        log_ratio = lw[0] - lw[1]
    if e <= 0.0 or inner <= 0.0:
        return None
    rel, ab = p.weight_rel_error, p.weight_abs_error
    e_hat = e * (1.0 + rel) + ab
    denom = inner * (1.0 - rel) - ab
    if denom <= 0.0:
        return None
    r_hat = math.exp(log_ratio) * (1.0 + 2.0 * rel) + ab * (1.0 / denom)
    if not 0.0 < r_hat < 1.0:
        return None
    return e_hat, r_hat


def _tail_entropy_cert(p: IntegerPmf, side: str) -> float:
    """Upper bound on the sum of p(k)*log(1/p(k)) beyond one window edge."""
    mass = p.tail_mass_left if side == "left" else p.tail_mass_right
    if mass + p.mass_deficit == 0.0:
        return 0.0
    if not p.geometric_tails:
        return math.inf
    geo = _edge_geometry(p, side)
    if geo is None:
        return math.inf
    e, r = geo
    if e * r >= 1.0 / math.e:
        return math.inf
    m_geo = e * r / (1.0 - r)
    return m_geo * math.log(1.0 / e) + m_geo * math.log(1.0 / r) / (1.0 - r)


def _tail_moment_certs(p: IntegerPmf, side: str, mu: float) -> tuple[float, float]:
    """(first, second) central moment bounds of the mass beyond one edge."""
    mass = p.tail_mass_left if side == "left" else p.tail_mass_right
    if mass + p.mass_deficit == 0.0:
        return 0.0, 0.0
    if not p.geometric_tails:
        return math.inf, math.inf
    geo = _edge_geometry(p, side)
    if geo is None:
        return math.inf, math.inf
    e, r = geo
    edge_k = p.offset if side == "left" else p.offset + p.size - 1
    d = abs(edge_k - mu)
    m_geo = e * r / (1.0 - r)
    g2 = e * r / (1.0 - r) ** 2
    g3 = e * r * (1.0 + r) / (1.0 - r) ** 3
    first = d * m_geo + g2
    second = d * d * m_geo + 2.0 * d * g2 + g3
    return first, second


def tail_entropy_certificate(p: IntegerPmf) -> float:
    """Certified bound on the total entropy contribution of both tails."""
    return _tail_entropy_cert(p, "left") + _tail_entropy_cert(p, "right")


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistStats:
    mean: float
    variance: float
    entropy: float
    certified_error: float  # certified bound on the entropy error
    pmax: float
    nmax: int
    q: float
    q_error: float
    mean_error: float
    variance_error: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance) if self.variance > 0.0 else 0.0


def stats(p: IntegerPmf, entropy_tol: float | None = None) -> DistStats:
    """All scalar statistics of a pmf with certified error bounds.

    If ``entropy_tol`` is given and the certified entropy error exceeds it,
    a ValueError is raised (the tail bound is too large to certify).
    """
    w = p.weights
    L = w.size
    rel, ab = p.weight_rel_error, p.weight_abs_error

    pmax = float(w.max())
    nmax = p.offset + int(np.flatnonzero(w == pmax)[-1])

    q = K.min_overlap_sum(w)
    q_error = p.tail_mass_bound + L * ab + rel * min(q + pmax, 1.0)

    entropy = K.xlogx_sum(w)
    if entropy < 0.0:
        entropy = 0.0
    ent_err = _tail_entropy_cert(p, "left") + _tail_entropy_cert(p, "right")
    ent_err += rel * (entropy + 1.0)
    if ab > 0.0:
        wa = np.maximum(w, ab)
        ent_err += float(np.sum(ab * (1.0 + np.abs(np.log(wa)))))
    d = p.mass_deficit
    if d > 0.0:
        # deficit mass may sit anywhere inside the window, including on top
        # of near-zero weights where the entropy integrand is steepest
        ent_err += d * (2.0 + math.log(1.0 / d) + abs(math.log(pmax)))
    if entropy_tol is not None and ent_err > entropy_tol:
        raise ValueError(
            f"certified entropy error {ent_err:.3e} exceeds requested {entropy_tol:.3e}"
        )

    mean = K.first_moment(w, float(p.offset))
    var = K.second_central_moment(w, float(p.offset), mean)

    tl1, tl2 = _tail_moment_certs(p, "left", mean)
    tr1, tr2 = _tail_moment_certs(p, "right", mean)
    # window index sums for the per-weight noise levers
    a = p.offset - mean
    s1 = L * (L - 1) / 2.0
    s2 = (L - 1) * L * (2 * L - 1) / 6.0
    sq_lever = L * a * a + 2.0 * a * s1 + s2
    abs_lever = math.sqrt(max(sq_lever, 0.0) * L) + L * abs(mean)

    mean_error = tl1 + tr1 + rel * (abs(mean) + math.sqrt(max(var, 0.0)) + 1.0)
    mean_error += ab * abs_lever
    var_error = tl2 + tr2 + rel * (var + 1.0) + ab * sq_lever
    if p.mass_deficit > 0.0:
        span = max(abs(p.offset - mean), abs(p.offset + L - 1 - mean))
        mean_error += p.mass_deficit * span
        var_error += p.mass_deficit * span * span
    # the mean uncertainty feeds back into the centered second moment
    var_error += 2.0 * math.sqrt(max(var, 0.0)) * mean_error + mean_error**2

    return DistStats(
        mean=mean,
        variance=var,
        entropy=entropy,
        certified_error=ent_err,
        pmax=pmax,
        nmax=nmax,
        q=q,
        q_error=q_error,
        mean_error=mean_error,
        variance_error=var_error,
    )


class LogConcavityResult(NamedTuple):
    is_log_concave: bool
    violation_index: int | None


def is_log_concave(
    p: IntegerPmf, rel_tol: float = 1e-12, min_weight: float = 0.0
) -> LogConcavityResult:
    """Check contiguous support and p(k)^2 >= p(k-1)p(k+1)(1 - rel_tol).

    The comparison runs in the log domain.  ``min_weight`` restricts the
    verdict to the contiguous region around the maximum where weights exceed
    that floor; convolution results computed by FFT use it to exclude the
    band where round-off noise swamps the true values.  With the default
    floor of 0 any interior zero weight fails the contiguity requirement.
    """
    w, lw = p.weights, p.log_weights
    if w.size <= 2:
        if min_weight == 0.0:
            z = np.flatnonzero(w == 0.0)
            if z.size:
                return LogConcavityResult(False, p.offset + int(z[0]))
        return LogConcavityResult(True, None)

    imax = int(np.argmax(w))
    above = w > min_weight
    i0 = imax
    while i0 > 0 and above[i0 - 1]:
        i0 -= 1
    i1 = imax
    while i1 < w.size - 1 and above[i1 + 1]:
        i1 += 1

    if min_weight == 0.0:
        inside = np.flatnonzero(~above)
        if inside.size:
            return LogConcavityResult(False, p.offset + int(inside[0]))

    if i1 - i0 < 2:
        return LogConcavityResult(True, None)
    seg = lw[i0 : i1 + 1]
    slack = -math.log1p(-rel_tol) if rel_tol > 0.0 else 0.0
    bad = np.flatnonzero(seg[:-2] + seg[2:] > 2.0 * seg[1:-1] + slack)
    if bad.size:
        return LogConcavityResult(False, p.offset + i0 + int(bad[0]) + 1)
    return LogConcavityResult(True, None)


def tv_shift_distance(p: IntegerPmf) -> float:
    """Total variation distance between the pmf and its unit shift.

    Computed directly from the absolute step sums, independent of the q
    summation, so identities relating the two are genuine cross-checks.
    """
    return 0.5 * K.abs_step_sum(p.weights)


def interval_probability(p: IntegerPmf, a: float, b: float) -> float:
    """Probability of the open interval (a, b), from stored weights."""
    if not a < b:
        raise ValueError("need a < b")
    lo = p.offset if a == -math.inf else max(p.offset, math.floor(a) + 1)
    hi = p.offset + p.size - 1 if b == math.inf else min(
        p.offset + p.size - 1, math.ceil(b) - 1
    )
    if hi < lo:
        return 0.0
    return K.sum_comp(p.weights[lo - p.offset : hi - p.offset + 1])


def entropy_tail(p: IntegerPmf, threshold: float) -> float:
    """Certified bound on the entropy mass at |k| >= threshold.

    Sums p(k) log(1/p(k)) over the stored window outside (-threshold,
    threshold) and adds the tail certificates for everything beyond the
    window.
    """
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    t = math.ceil(threshold)
    lo, hi = p.support
    total = 0.0
    if -t >= lo:
        total += K.xlogx_sum(p.weights[: min(-t, hi) - lo + 1])
    if t <= hi:
        total += K.xlogx_sum(p.weights[max(t, lo) - lo :])
    total += _tail_entropy_cert(p, "left") + _tail_entropy_cert(p, "right")
    return total


# ---------------------------------------------------------------------------
# random instances and JSON interchange
# ---------------------------------------------------------------------------

def random_log_concave_pmf(
    rng: np.random.Generator,
    max_size: int = 80,
    min_size: int = 2,
    offset_range: int = 50,
) -> IntegerPmf:
    """Random finite-support log-concave pmf (exact: zero tail mass).

    Log-concavity is equivalent to the log-weight increments being
    non-increasing, so sorted random increments generate the whole class.
    """
    m = int(rng.integers(min_size, max_size + 1))
    if m == 1:
        return from_weights(int(rng.integers(-offset_range, offset_range)), [1.0])
    scale = float(rng.uniform(0.05, 1.5))
    steps = np.sort(rng.normal(0.0, scale, size=m - 1))[::-1]
    lw = np.concatenate([[0.0], np.cumsum(steps)])
    lw -= lw.max()
    return from_weights(
        int(rng.integers(-offset_range, offset_range)),
        np.exp(lw),
        provenance={"family": "random-log-concave"},
        normalize=True,
    )


def pmf_to_json(p: IntegerPmf) -> str:
    """Serialize to the interchange document (17 significant digits)."""
    ws = ", ".join(format(x, ".17g") for x in p.weights)
    prov = json.dumps(p.provenance, sort_keys=True)
    return (
        "{"
        f'"offset": {p.offset}, '
        f'"weights": [{ws}], '
        f'"tail_mass_bound": {format(p.tail_mass_bound, ".17g")}, '
        f'"provenance": {prov}'
        "}"
    )


def pmf_from_json(text: str) -> IntegerPmf:
    """Parse the interchange document produced by pmf_to_json.

    The document carries a single tail bound with no side information, so
    the mass is split evenly; tail certificates remain available only if the
    stored window passes the log-concavity check (otherwise statistics on a
    pmf with nonzero tail report infinite certified entropy error).
    """
    doc = json.loads(text)
    try:
        offset = int(doc["offset"])
        weights = doc["weights"]
        tail = float(doc["tail_mass_bound"])
        prov = doc.get("provenance", {"family": "custom"})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pmf document: {exc}") from exc
    if isinstance(prov, str):
        prov = {"family": prov}
    p = from_weights(
        offset,
        weights,
        mass_deficit=tail,
        provenance=prov,
    )
    if tail > 0.0 and is_log_concave(p, rel_tol=1e-9).is_log_concave:
        p = IntegerPmf(
            offset=p.offset,
            weights=p.weights,
            log_weights=p.log_weights,
            tail_mass_left=p.tail_mass_left,
            tail_mass_right=p.tail_mass_right,
            geometric_tails=True,
            provenance=p.provenance,
            weight_rel_error=p.weight_rel_error,
            weight_abs_error=p.weight_abs_error,
            mass_deficit=p.mass_deficit,
        )
    return p


def load_pmf(path: str) -> IntegerPmf:
    with open(path, "r", encoding="utf-8") as fh:
        return pmf_from_json(fh.read())


def save_pmf(p: IntegerPmf, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pmf_to_json(p))
        fh.write("\n")
