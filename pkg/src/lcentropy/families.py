"""Standard integer distribution families with certified truncation.

Weights are generated in the log domain from the one-step log-ratio
recurrence of each family, anchored at the mode, and the window is extended
until the one-step ratio r at each edge satisfies r < 1 and the geometric
bound p(edge) * r / (1 - r) drops below the per-side tail tolerance.  For
log-concave families the ratio sequence is monotone, so that bound is a true
certificate for everything beyond the window.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import _kernels as K
from .pmf import DEFAULT_TAIL_TOL, MAX_WINDOW, IntegerPmf, WindowCapError, from_weights

_CHUNK = 65536

FAMILY_PARAMS = {
    "bernoulli": ("p",),
    "delta": ("k",),
    "uniform": ("m",),
    "geometric": ("p",),
    "poisson": ("lam",),
    "binomial": ("m", "p"),
    "negative_binomial": ("r", "p"),
    "two_sided_geometric": ("beta",),
}


def family_names() -> tuple[str, ...]:
    return tuple(FAMILY_PARAMS)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _check_params(name: str, params: dict) -> dict:
    if name not in FAMILY_PARAMS:
        raise ValueError(f"unknown family {name!r}; known: {', '.join(FAMILY_PARAMS)}")
    expected = set(FAMILY_PARAMS[name])
    got = set(params)
    if got != expected:
        raise ValueError(
            f"family {name!r} takes parameters {sorted(expected)}, got {sorted(got)}"
        )
    return params


# ---------------------------------------------------------------------------
# log-ratio step functions, log pmf anchors, and supports
# ---------------------------------------------------------------------------

def _step_fn(name: str, params: dict) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized log(p(k+1)/p(k)) on the interior of the support."""
    if name == "geometric":
        c = math.log1p(-params["p"])
        return lambda k: np.full(np.shape(k), c, dtype=np.float64)
    if name == "poisson":
        lam = params["lam"]
        return lambda k: np.log(lam / (np.asarray(k, dtype=np.float64) + 1.0))
    if name == "binomial":
        m, p = params["m"], params["p"]
        lodds = math.log(p) - math.log1p(-p)
        return lambda k: (
            np.log((m - np.asarray(k, dtype=np.float64)) / (np.asarray(k, dtype=np.float64) + 1.0))
            + lodds
        )
    if name == "negative_binomial":
        r, p = params["r"], params["p"]
        c = math.log1p(-p)
        return lambda k: (
            np.log((np.asarray(k, dtype=np.float64) + r) / (np.asarray(k, dtype=np.float64) + 1.0))
            + c
        )
    if name == "two_sided_geometric":
        lb = math.log(params["beta"])
        return lambda k: np.where(np.asarray(k) >= 0, lb, -lb).astype(np.float64)
    raise ValueError(f"family {name!r} has no step recurrence")


def _anchor(name: str, params: dict) -> tuple[int, float]:
    """(mode index, log pmf at mode).  A constant error in the anchor is
    removed by the final normalization; only the steps must be accurate."""
    if name == "geometric":
        return 0, math.log(params["p"])
    if name == "poisson":
        lam = params["lam"]
        m0 = max(0, math.floor(lam))
        return m0, m0 * math.log(lam) - lam - math.lgamma(m0 + 1.0)
    if name == "binomial":
        m, p = params["m"], params["p"]
        m0 = min(m, max(0, math.floor((m + 1) * p)))
        return m0, (
            math.lgamma(m + 1.0)
            - math.lgamma(m0 + 1.0)
            - math.lgamma(m - m0 + 1.0)
            + m0 * math.log(p)
            + (m - m0) * math.log1p(-p)
        )
    if name == "negative_binomial":
        r, p = params["r"], params["p"]
        m0 = max(0, math.floor((r - 1.0) * (1.0 - p) / p)) if r > 1.0 else 0
        return m0, (
            math.lgamma(m0 + r)
            - math.lgamma(r)
            - math.lgamma(m0 + 1.0)
            + r * math.log(p)
            + m0 * math.log1p(-p)
        )
    if name == "two_sided_geometric":
        b = params["beta"]
        return 0, math.log1p(-b) - math.log1p(b)
    raise ValueError(f"family {name!r} has no anchor")


def _support(name: str, params: dict) -> tuple[int | None, int | None]:
    if name == "binomial":
        return 0, params["m"]
    if name == "two_sided_geometric":
        return None, None
    return 0, None


def closed_form_log_ratio(p: IntegerPmf) -> Callable[[int], float] | None:
    """Scalar log(p(k+1)/p(k)) from the family recurrence, if known.

    Lets ratio searches cover windows far beyond the stored support in
    O(log) time.  Returns -inf beyond the upper support edge and +inf below
    the lower one (zero over zero regions never arise in the searches used).
    """
    prov = p.provenance
    name = prov.get("family")
    params = prov.get("params")
    if name not in FAMILY_PARAMS or not isinstance(params, dict):
        return None
    if name in ("bernoulli", "delta", "uniform"):
        lo, hi = p.support
        def simple(k: int) -> float:
            if k <= lo - 1:
                return math.inf
            if k >= hi:
                return -math.inf
            return float(p.log_weights[k + 1 - lo] - p.log_weights[k - lo])
        return simple
    step = _step_fn(name, params)
    s_lo, s_hi = _support(name, params)
    def fn(k: int) -> float:
        if s_hi is not None and k >= s_hi:
            return -math.inf
        if s_lo is not None and k < s_lo - 1:
            return math.inf
        if s_lo is not None and k == s_lo - 1:
            return math.inf
        return float(step(np.asarray([k]))[0])
    return fn


# ---------------------------------------------------------------------------
# windowed construction
# ---------------------------------------------------------------------------

def _grow_side(
    anchor_lw: float,
    step,
    direction: int,
    support_edge: int | None,
    anchor_k: int,
    side_tol: float,
    other_len: int,
) -> tuple[np.ndarray, float]:
    """Log-weights strictly beyond the anchor on one side, plus tail bound.

    direction +1 grows toward larger k using step(k) = log(p(k+1)/p(k));
    direction -1 grows toward smaller k using -step(k-1).
    """
    chunks: list[np.ndarray] = []
    total = 0
    last_lw = anchor_lw
    k_cur = anchor_k
    log_tol = math.log(side_tol)
    while True:
        if support_edge is not None:
            remaining = (support_edge - k_cur) if direction > 0 else (k_cur - support_edge)
            if remaining <= 0:
                return _concat_side(chunks), 0.0
            n = min(_CHUNK, remaining)
        else:
            n = _CHUNK
        if total + n + other_len + 1 > MAX_WINDOW:
            raise WindowCapError(
                f"window exceeded cap {MAX_WINDOW} before tail certificate was met"
            )
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if direction > 0:
                ks = k_cur + np.arange(n)
                steps = np.asarray(step(ks), dtype=np.float64)
                out_steps = np.asarray(step(ks + 1), dtype=np.float64)
            else:
                ks = k_cur - 1 - np.arange(n)
                steps = -np.asarray(step(ks), dtype=np.float64)
                out_steps = -np.asarray(step(ks - 1), dtype=np.float64)
            lws = last_lw + np.cumsum(steps)
            # certificate: outward one-step ratio r < 1 and p_edge * r/(1-r) <= tol
            r = np.exp(out_steps)
            log1m_r = np.where(r < 1.0, np.log1p(-np.minimum(r, 1.0)), 0.0)
            ok = (r < 1.0) & (lws + out_steps - log1m_r <= log_tol)
        hit = np.flatnonzero(ok)
        if hit.size:
            j = int(hit[0])
            chunks.append(lws[: j + 1])
            r_e = float(r[j])
            bound = math.exp(lws[j] + out_steps[j] - math.log1p(-r_e)) if r_e > 0.0 else 0.0
            return _concat_side(chunks), bound
        chunks.append(lws)
        total += n
        last_lw = float(lws[-1])
        k_cur = k_cur + n if direction > 0 else k_cur - n


def _concat_side(chunks: list[np.ndarray]) -> np.ndarray:
    if not chunks:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(chunks)


def from_family(name: str, params: dict, tail_tol: float = DEFAULT_TAIL_TOL) -> IntegerPmf:
    """Instantiate a family pmf whose total tail bound is at most tail_tol.

    Weights are generated in the log domain and exponentiated, so windows
    reach probabilities near 1e-300 without underflow artifacts in the
    ratios.
    """
    _require(0.0 < tail_tol <= 1e-6, "tail_tol must lie in (0, 1e-6]")
    params = dict(_check_params(name, params))
    prov = {"family": name, "params": params}

    if name == "bernoulli":
        p = params["p"]
        _require(0.0 < p < 1.0, "bernoulli p must lie in (0, 1)")
        return from_weights(0, [1.0 - p, p], provenance=prov, geometric_tails=True,
                            weight_rel_error=1e-15)
    if name == "delta":
        k = params["k"]
        _require(float(k).is_integer(), "delta location must be an integer")
        return from_weights(int(k), [1.0], provenance=prov, geometric_tails=True,
                            weight_rel_error=0.0)
    if name == "uniform":
        m = params["m"]
        _require(float(m).is_integer() and m >= 1, "uniform m must be a positive integer")
        m = int(m)
        _require(m <= MAX_WINDOW, "uniform m exceeds the window cap")
        return from_weights(0, np.full(m, 1.0 / m), provenance=prov,
                            geometric_tails=True, weight_rel_error=1e-15,
                            normalize=True)

    if name == "geometric":
        _require(0.0 < params["p"] < 1.0, "geometric p must lie in (0, 1)")
    elif name == "poisson":
        _require(params["lam"] > 0.0, "poisson rate must be positive")
    elif name == "binomial":
        m, p = params["m"], params["p"]
        _require(float(m).is_integer() and m >= 1, "binomial m must be a positive integer")
        _require(0.0 < p < 1.0, "binomial p must lie in (0, 1)")
        params["m"] = int(m)
    elif name == "negative_binomial":
        r, p = params["r"], params["p"]
        _require(r >= 1.0, "negative_binomial r must be >= 1 (log-concave range)")
        _require(0.0 < p < 1.0, "negative_binomial p must lie in (0, 1)")
    elif name == "two_sided_geometric":
        _require(0.0 < params["beta"] < 1.0, "two_sided_geometric beta must lie in (0, 1)")

    step = _step_fn(name, params)
    anchor_k, anchor_lw = _anchor(name, params)
    s_lo, s_hi = _support(name, params)
    side_tol = tail_tol / 2.0

    lw_right, tail_right = _grow_side(anchor_lw, step, +1, s_hi, anchor_k, side_tol, 0)
    lw_left, tail_left = _grow_side(anchor_lw, step, -1, s_lo, anchor_k, side_tol,
                                    lw_right.size)
    lw = np.concatenate([lw_left[::-1], [anchor_lw], lw_right])
    offset = anchor_k - lw_left.size

    # worst-case drift of the plain cumsum over the log weights
    span = float(lw.max() - lw.min()) if lw.size else 1.0
    n_side = max(lw_left.size, lw_right.size, 1)
    rel = 1e-15 + n_side * 1.2e-16 * max(2.0, span)

    return from_weights(
        offset,
        np.exp(lw),
        log_weights=lw,
        tail_mass_left=tail_left,
        tail_mass_right=tail_right,
        geometric_tails=True,
        provenance=prov,
        weight_rel_error=rel,
        normalize=True,
    )


# ---------------------------------------------------------------------------
# parameterization by target standard deviation
# ---------------------------------------------------------------------------

def params_for_sigma(name: str, sigma: float) -> dict:
    """Family parameters hitting a target standard deviation (approximately:
    integer-valued parameters are rounded)."""
    _require(sigma > 0.0, "sigma must be positive")
    s2 = sigma * sigma
    if name == "geometric":
        return {"p": 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * s2))}
    if name == "poisson":
        return {"lam": s2}
    if name == "binomial":
        return {"m": max(1, round(4.0 * s2)), "p": 0.5}
    if name == "negative_binomial":
        r = 2.0
        return {"r": r, "p": 2.0 * r / (r + math.sqrt(r * r + 4.0 * r * s2))}
    if name == "two_sided_geometric":
        return {"beta": (s2 + 1.0 - math.sqrt(2.0 * s2 + 1.0)) / s2}
    if name == "uniform":
        return {"m": max(1, round(math.sqrt(12.0 * s2 + 1.0)))}
    raise ValueError(f"no sigma parameterization for family {name!r}")


def exact_variance(name: str, params: dict) -> float:
    """Closed-form variance, used as an oracle in tests."""
    if name == "bernoulli":
        p = params["p"]
        return p * (1.0 - p)
    if name == "delta":
        return 0.0
    if name == "uniform":
        m = params["m"]
        return (m * m - 1.0) / 12.0
    if name == "geometric":
        p = params["p"]
        return (1.0 - p) / (p * p)
    if name == "poisson":
        return params["lam"]
    if name == "binomial":
        return params["m"] * params["p"] * (1.0 - params["p"])
    if name == "negative_binomial":
        r, p = params["r"], params["p"]
        return r * (1.0 - p) / (p * p)
    if name == "two_sided_geometric":
        b = params["beta"]
        return 2.0 * b / ((1.0 - b) * (1.0 - b))
    raise ValueError(f"unknown family {name!r}")
