"""Convolutions of integer pmfs with certified error accounting.

Two tiers: an exact O(N*M) direct method with compensated accumulation for
small windows, and an FFT method for everything else.  Both propagate the
operands' tail bounds and report a per-element error envelope; n-fold
self-convolution uses binary exponentiation with per-step re-truncation so
chains stay within memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .pmf import DEFAULT_TAIL_TOL, IntegerPmf, from_weights, is_log_concave

DEFAULT_DIRECT_CAP = 200_000

_EPS = float(np.finfo(np.float64).eps)

# Relative per-element noise above which log-domain ratio comparisons in the
# log-concavity re-check become meaningless at rel_tol 1e-9.
_LC_FLOOR_FACTOR = 4.0e9


class DirectCapError(RuntimeError):
    """Direct-method output window would exceed the configured cap."""


@dataclass(frozen=True)
class ConvolutionReport:
    result: IntegerPmf
    method: str
    max_abs_error_bound: float
    operand_tail_carry: float
    log_concave: bool | None = None


def _merge_provenance(p1: IntegerPmf, p2: IntegerPmf) -> dict:
    return {"family": "convolution", "operands": [p1.provenance, p2.provenance]}


def _finish(
    p1: IntegerPmf,
    p2: IntegerPmf,
    weights: np.ndarray,
    offset: int,
    method: str,
    weight_abs_err: float,
    report_err: float,
    extra_rel: float = 0.0,
    extra_tail_left: float = 0.0,
    extra_tail_right: float = 0.0,
) -> ConvolutionReport:
    # operand tail mass turns into cross terms that can land anywhere in the
    # output, so it is carried as a placement-free deficit rather than as
    # window-edge tail mass
    carry = p1.tail_mass_bound + p2.tail_mass_bound
    rel = p1.weight_rel_error + p2.weight_rel_error + extra_rel + 8.0 * _EPS
    s = K.sum_comp(weights)
    target = 1.0 - carry - extra_tail_left - extra_tail_right
    scale_shift = abs(s - target)
    result = from_weights(
        offset,
        weights,
        tail_mass_left=extra_tail_left,
        tail_mass_right=extra_tail_right,
        geometric_tails=p1.geometric_tails and p2.geometric_tails,
        provenance=_merge_provenance(p1, p2),
        weight_rel_error=rel,
        weight_abs_error=weight_abs_err,
        mass_deficit=carry,
        normalize=True,
    )
    # normalization moves each weight by at most the mass imbalance it fixes
    err = report_err + scale_shift * float(result.weights.max())
    err += p1.tail_mass_bound * float(p2.weights.max())
    err += p2.tail_mass_bound * float(p1.weights.max())
    return ConvolutionReport(
        result=result,
        method=method,
        max_abs_error_bound=err,
        operand_tail_carry=carry,
    )


def convolve_direct(
    p1: IntegerPmf, p2: IntegerPmf, direct_cap: int = DEFAULT_DIRECT_CAP
) -> ConvolutionReport:
    """Exact dense convolution; intended for windows below the cap.

    Every output is a sum of nonnegative products, so the accumulation error
    is relative regardless of magnitude; the reported envelope is the
    conventional absolute form.
    """
    n_out = p1.size + p2.size - 1
    if n_out > direct_cap:
        raise DirectCapError(
            f"direct convolution output {n_out} exceeds cap {direct_cap}; use the fft tier"
        )
    w = np.asarray(K.convolve_direct(p1.weights, p2.weights), dtype=np.float64)
    n_terms = min(p1.size, p2.size)
    fp_env = 1e-15 * float(w.max()) * n_terms
    return _finish(
        p1, p2, w, p1.offset + p2.offset, "direct",
        weight_abs_err=0.0,
        report_err=fp_env,
        extra_rel=n_terms * 2.5e-16,
    )


def convolve_fft(p1: IntegerPmf, p2: IntegerPmf) -> ConvolutionReport:
    """Real-FFT convolution, zero-padded to the next power of two.

    Negative round-off is clamped to zero and the clamp magnitude is added
    to the error bound; window ends below the noise floor are trimmed, with
    the trimmed (spurious plus true) mass moved into the tail ledger.
    """
    n_out = p1.size + p2.size - 1
    L = 1 << (n_out - 1).bit_length()
    fa = np.fft.rfft(p1.weights, L)
    fb = np.fft.rfft(p2.weights, L)
    w = np.fft.irfft(fa * fb, L)[:n_out]

    norm1 = float(np.sqrt(np.dot(p1.weights, p1.weights)))
    norm2 = float(np.sqrt(np.dot(p2.weights, p2.weights)))
    fft_err = 8.0 * _EPS * math.log2(L) * norm1 * norm2
    clamp = float(-w.min()) if w.min() < 0.0 else 0.0
    np.maximum(w, 0.0, out=w)
    abs_err = fft_err + clamp

    # trim the noise-dominated band at each end
    floor = 16.0 * abs_err
    lo = 0
    hi = w.size
    while lo < hi and w[lo] <= floor:
        lo += 1
    while hi > lo and w[hi - 1] <= floor:
        hi -= 1
    if hi <= lo:  # everything at the noise floor: keep the peak sample
        peak = int(np.argmax(w))
        lo, hi = peak, peak + 1
    cut_left = K.sum_comp(w[:lo]) if lo else 0.0
    cut_right = K.sum_comp(w[hi:]) if hi < w.size else 0.0
    return _finish(
        p1,
        p2,
        w[lo:hi],
        p1.offset + p2.offset + lo,
        "fft",
        weight_abs_err=abs_err,
        report_err=abs_err,
        extra_tail_left=cut_left,
        extra_tail_right=cut_right,
    )


def convolve(
    p1: IntegerPmf,
    p2: IntegerPmf,
    method: str = "auto",
    direct_cap: int = DEFAULT_DIRECT_CAP,
) -> ConvolutionReport:
    if method == "direct":
        return convolve_direct(p1, p2, direct_cap)
    if method == "fft":
        return convolve_fft(p1, p2)
    if method != "auto":
        raise ValueError(f"unknown convolution method {method!r}")
    n_out = p1.size + p2.size - 1
    if n_out <= direct_cap and p1.size * p2.size <= 4_000_000:
        return convolve_direct(p1, p2, direct_cap)
    return convolve_fft(p1, p2)


def _trim_to_budget(p: IntegerPmf, budget: float, value_floor: float = 0.0) -> IntegerPmf:
    """Cut window ends whose exact discarded mass stays within budget/side.

    Elements at or below ``value_floor`` are cut regardless of the budget:
    FFT results must not keep edge weights so close to the noise bound that
    the outward ratio, and with it the geometric tail certificate, becomes
    unresolvable.
    """
    w = p.weights
    side = budget / 2.0
    lo, acc = 0, 0.0
    while lo < w.size - 1 and (acc + w[lo] <= side or w[lo] <= value_floor):
        acc += w[lo]
        lo += 1
    cut_left = K.sum_comp(w[:lo]) if lo else 0.0
    hi, acc = w.size, 0.0
    while hi - 1 > lo and (acc + w[hi - 1] <= side or w[hi - 1] <= value_floor):
        acc += w[hi - 1]
        hi -= 1
    cut_right = K.sum_comp(w[hi:]) if hi < w.size else 0.0
    if lo == 0 and hi == w.size:
        return p
    return from_weights(
        p.offset + lo,
        w[lo:hi],
        log_weights=p.log_weights[lo:hi],
        tail_mass_left=p.tail_mass_left + cut_left,
        tail_mass_right=p.tail_mass_right + cut_right,
        geometric_tails=p.geometric_tails,
        provenance=p.provenance,
        weight_rel_error=p.weight_rel_error,
        weight_abs_error=p.weight_abs_error,
        normalize=True,
    )


def self_convolve(
    p: IntegerPmf,
    n: int,
    method: str = "auto",
    tail_tol: float = DEFAULT_TAIL_TOL,
    direct_cap: int = DEFAULT_DIRECT_CAP,
) -> ConvolutionReport:
    """n-fold self-convolution by binary exponentiation.

    Each intermediate result is re-truncated to the tail budget, and the
    final pmf is re-checked for log-concavity (restricted to the region
    where weights clear the accumulated noise floor, since ratio tests are
    unresolvable below it).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        lc = is_log_concave(p, rel_tol=1e-9).is_log_concave
        return ConvolutionReport(
            result=p,
            method="identity",
            max_abs_error_bound=p.weight_abs_error,
            operand_tail_carry=p.tail_mass_bound,
            log_concave=lc,
        )

    def _step_trim(rep: ConvolutionReport) -> IntegerPmf:
        floor = 1e5 * rep.result.weight_abs_error if rep.method == "fft" else 0.0
        return _trim_to_budget(rep.result, tail_tol, value_floor=floor)

    base = p
    acc: IntegerPmf | None = None
    err = 0.0
    carry = 0.0
    used_fft = False
    remaining = n
    while remaining > 0:
        if remaining & 1:
            if acc is None:
                acc = base
            else:
                rep = convolve(acc, base, method=method, direct_cap=direct_cap)
                acc = _step_trim(rep)
                err = rep.max_abs_error_bound
                carry = rep.operand_tail_carry
                used_fft = used_fft or rep.method == "fft"
        remaining >>= 1
        if remaining:
            rep = convolve(base, base, method=method, direct_cap=direct_cap)
            base = _step_trim(rep)
            err = max(err, rep.max_abs_error_bound)
            used_fft = used_fft or rep.method == "fft"
    assert acc is not None

    floor = _LC_FLOOR_FACTOR * acc.weight_abs_error
    lc = is_log_concave(acc, rel_tol=1e-9, min_weight=floor).is_log_concave
    return ConvolutionReport(
        result=acc,
        method="fft" if used_fft else "direct",
        max_abs_error_bound=max(err, acc.weight_abs_error),
        operand_tail_carry=max(carry, acc.tail_mass_bound),
        log_concave=lc,
    )
