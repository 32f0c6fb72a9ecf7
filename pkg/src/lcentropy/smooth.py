"""Piecewise-polynomial densities of S + U_1 + ... + U_n and their entropy.

The density of a sum of n independent uniforms on (0,1) is a spline of
degree n-1 with integer breakpoints (the Irwin-Hall density).  Convolving an
integer pmf with it gives a density that is polynomial on every unit
interval, so differential entropy reduces to per-interval Gauss-Legendre
quadrature of -f log f with a doubled-node refinement supplying the
certified error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .pmf import IntegerPmf, is_log_concave, stats, tail_entropy_certificate

MAX_ORDER = 16

_UNDERFLOW_FLOOR = 1e-300

_nodes32, _w32 = np.polynomial.legendre.leggauss(32)
_nodes64, _w64 = np.polynomial.legendre.leggauss(64)
_X32 = np.ascontiguousarray((_nodes32 + 1.0) / 2.0)
_W32 = np.ascontiguousarray(_w32 / 2.0)
_X64 = np.ascontiguousarray((_nodes64 + 1.0) / 2.0)
_W64 = np.ascontiguousarray(_w64 / 2.0)


@dataclass(frozen=True)
class IrwinHallSpline:
    """Density of U_1 + ... + U_n as per-cell polynomials in local t.

    coeffs[m, d] is the t^d coefficient on [m, m+1); exact holds the same
    coefficients as Fractions (the recurrence is carried out exactly and
    converted to binary64 once at the end).
    """

    order: int
    coeffs: np.ndarray
    exact: tuple[tuple[Fraction, ...], ...]

    def __call__(self, x: float) -> float:
        if x < 0.0 or x >= self.order:
            return 0.0
        m = int(math.floor(x))
        t = x - m
        acc = 0.0
        for d in range(self.order - 1, -1, -1):
            acc = acc * t + self.coeffs[m, d]
        return acc


@lru_cache(maxsize=None)
def _irwin_hall_exact(n: int) -> tuple[tuple[Fraction, ...], ...]:
    if n == 1:
        return ((Fraction(1),),)
    prev = _irwin_hall_exact(n - 1)
    # antiderivatives A_m with A_m(0) = 0, then
    # piece_m(t) = A_{m-1}(1) - A_{m-1}(t) + A_m(t)
    anti = []
    for piece in prev:
        anti.append(tuple([Fraction(0)] + [c / (d + 1) for d, c in enumerate(piece)]))
    pieces = []
    for m in range(n):
        coeffs = [Fraction(0)] * n
        if 0 <= m - 1 < len(anti):
            left = anti[m - 1]
            coeffs[0] += sum(left)  # A_{m-1}(1)
            for d, c in enumerate(left):
                coeffs[d] -= c
        if m < len(anti):
            for d, c in enumerate(anti[m]):
                coeffs[d] += c
        pieces.append(tuple(coeffs))
    return tuple(pieces)


def irwin_hall(n: int) -> IrwinHallSpline:
    """Spline pieces of the order-n uniform-sum density, 1 <= n <= 16."""
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_ORDER}]")
    exact = _irwin_hall_exact(n)
    coeffs = np.array([[float(c) for c in piece] for piece in exact])
    coeffs.flags.writeable = False
    return IrwinHallSpline(order=n, coeffs=coeffs, exact=exact)


@dataclass(frozen=True)
class SmoothedDensity:
    """Density of X + U_1 + ... + U_n for X with the given base pmf.

    coeffs[i, d] is the t^d coefficient on [first_interval + i,
    first_interval + i + 1); the window extends order-1 intervals past the
    pmf window.
    """

    base: IntegerPmf
    order: int
    first_interval: int
    coeffs: np.ndarray

    @property
    def n_intervals(self) -> int:
        return int(self.coeffs.shape[0])

    def __call__(self, x: float) -> float:
        i = int(math.floor(x)) - self.first_interval
        if not 0 <= i < self.n_intervals:
            return 0.0
        t = x - math.floor(x)
        acc = 0.0
        for d in range(self.order - 1, -1, -1):
            acc = acc * t + self.coeffs[i, d]
        return acc


def smoothed_density(p: IntegerPmf, n: int) -> SmoothedDensity:
    spline = irwin_hall(n)
    cols = [np.convolve(p.weights, spline.coeffs[:, d]) for d in range(n)]
    coeffs = np.ascontiguousarray(np.stack(cols, axis=1))
    coeffs.flags.writeable = False
    return SmoothedDensity(base=p, order=n, first_interval=p.offset, coeffs=coeffs)


# ---------------------------------------------------------------------------
# integrals of the piecewise-polynomial density
# ---------------------------------------------------------------------------

def _moment_vectors(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = np.arange(order, dtype=np.float64)
    return 1.0 / (d + 1.0), 1.0 / (d + 2.0), 1.0 / (d + 3.0)


def density_mass(f: SmoothedDensity) -> float:
    inv1, _, _ = _moment_vectors(f.order)
    return K.sum_comp(np.ascontiguousarray(f.coeffs @ inv1))


def density_mean(f: SmoothedDensity) -> float:
    inv1, inv2, _ = _moment_vectors(f.order)
    m0 = f.coeffs @ inv1
    m1 = f.coeffs @ inv2
    ks = f.first_interval + np.arange(f.n_intervals, dtype=np.float64)
    return K.sum_comp(np.ascontiguousarray(ks * m0 + m1))


def density_variance(f: SmoothedDensity) -> float:
    inv1, inv2, inv3 = _moment_vectors(f.order)
    mu = density_mean(f)
    m0 = f.coeffs @ inv1
    m1 = f.coeffs @ inv2
    m2 = f.coeffs @ inv3
    a = (f.first_interval - mu) + np.arange(f.n_intervals, dtype=np.float64)
    return K.sum_comp(np.ascontiguousarray(a * a * m0 + 2.0 * a * m1 + m2))


def mass_between(f: SmoothedDensity, a: float, b: float) -> float:
    """Integral of f over (a, b) restricted to the stored intervals."""
    if not a < b:
        raise ValueError("need a < b")
    lo_k, hi_k = f.first_interval, f.first_interval + f.n_intervals
    a = max(a, float(lo_k))
    b = min(b, float(hi_k))
    if a >= b:
        return 0.0

    def anti(i: int, t: float) -> float:
        acc = 0.0
        for d in range(f.order - 1, -1, -1):
            acc = acc * t + f.coeffs[i, d] / (d + 1.0)
        return acc * t

    parts = []
    k = int(math.floor(a)) - f.first_interval
    x = a
    while x < b:
        x_next = min(float(f.first_interval + k + 1), b)
        t0 = x - (f.first_interval + k)
        t1 = x_next - (f.first_interval + k)
        parts.append(anti(k, t1) - anti(k, t0))
        k += 1
        x = x_next
    return K.sum_comp(np.asarray(parts, dtype=np.float64))


# ---------------------------------------------------------------------------
# differential entropy with certified quadrature error
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    certified_error: float
    tol_achieved: bool


def _quad_noise_term(f: SmoothedDensity, coeffs: np.ndarray) -> float:
    """Entropy-integral perturbation bound from per-weight noise."""
    ab = f.base.weight_abs_error
    rel = f.base.weight_rel_error
    out = 0.0
    if ab > 0.0 and coeffs.shape[0]:
        fmax = np.abs(coeffs).sum(axis=1)
        fmax = np.maximum(fmax, ab)
        out += float(np.sum(f.order * ab * (1.0 + np.abs(np.log(fmax)))))
    if rel > 0.0:
        out += rel * (1.0 + float(f.order))
    return out


def differential_entropy(f: SmoothedDensity, tol: float = 1e-9) -> QuadratureResult:
    """-integral of f log f with a certified error bound.

    Every unit interval is integrated with 32-node Gauss-Legendre quadrature
    and re-evaluated at 64 nodes; the summed discrepancy, the underflow
    closed-form bounds, the base pmf's entropy-tail certificates, and the
    weight-noise perturbation all enter the certified error.  If that error
    exceeds tol the value is still returned, flagged as not achieving the
    tolerance.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    value, disc, under = K.quad_xlogx(
        f.coeffs, _X32, _W32, _X64, _W64, _UNDERFLOW_FLOOR
    )
    cert = disc + under
    cert += f.order * tail_entropy_certificate(f.base)
    cert += _quad_noise_term(f, f.coeffs)
    return QuadratureResult(value=value, certified_error=cert, tol_achieved=cert <= tol)


def entropy_outside(f: SmoothedDensity, radius: float, center: float = 0.0) -> float:
    """Certified upper bound on -integral of f log f over |x-center|>=radius.

    Only intervals lying entirely outside the ball contribute quadrature;
    the base tail certificates cover everything beyond the stored window.
    F = x log(1/x) is nonnegative for the tiny densities out there, so value
    plus certified error is an upper bound.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    ks = f.first_interval + np.arange(f.n_intervals)
    outside = (ks >= center + radius) | (ks + 1.0 <= center - radius)
    coeffs = np.ascontiguousarray(f.coeffs[outside])
    value, disc, under = K.quad_xlogx(
        coeffs, _X32, _W32, _X64, _W64, _UNDERFLOW_FLOOR
    )
    bound = value + disc + under
    bound += f.order * tail_entropy_certificate(f.base)
    bound += _quad_noise_term(f, coeffs)
    return bound


def scaled_entropy(h: float, a: float) -> float:
    """Differential entropy of a*Y given h(Y)."""
    if a <= 0.0:
        raise ValueError("scale must be positive")
    return h + math.log(a)


# ---------------------------------------------------------------------------
# per-interval deviation from the step approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    precondition_met: bool
    reason: str
    residuals: np.ndarray | None
    total: float | None
    bound: float | None


def step_residuals(p: IntegerPmf, n: int) -> ResidualReport:
    """Per-interval sup |f(x) - p(k)| for f the order-n smoothed density.

    Defined for log-concave p with sigma >= 1 and n >= 2 (the regime where
    the total admits the (2^n - 2)/sigma bound); anything else reports a
    precondition violation instead of a number.  The supremum on each
    interval is attained at an endpoint or at a real critical point of the
    degree n-1 polynomial, all of which are checked.
    """
    if n < 2 or n > MAX_ORDER:
        return ResidualReport(False, f"order {n} outside [2, {MAX_ORDER}]", None, None, None)
    st = stats(p)
    sigma = st.sigma
    if sigma < 1.0:
        return ResidualReport(False, f"sigma {sigma:.6g} below 1", None, None, None)
    floor = 4.0e9 * p.weight_abs_error
    if not is_log_concave(p, rel_tol=1e-9, min_weight=floor).is_log_concave:
        return ResidualReport(False, "pmf is not log-concave", None, None, None)

    f = smoothed_density(p, n)
    q = np.array(f.coeffs)
    pad = np.zeros(f.n_intervals)
    pad[: p.size] = p.weights
    q[:, 0] -= pad

    cand = [np.abs(q[:, 0]), np.abs(q.sum(axis=1))]  # t = 0 and t = 1
    deg = n - 2  # degree of the derivative
    if deg == 1:
        c1 = q[:, 1]
        c2 = q[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(c2 != 0.0, -c1 / (2.0 * c2), -1.0)
        cand.append(np.where((t > 0.0) & (t < 1.0), np.abs(_horner(q, t)), 0.0))
    elif deg >= 2:
        roots = _derivative_roots(q)
        for r in roots:
            cand.append(np.where((r > 0.0) & (r < 1.0), np.abs(_horner(q, r)), 0.0))
    resid = np.maximum.reduce(cand)
    total = K.sum_comp(np.ascontiguousarray(resid))
    return ResidualReport(True, "", resid, total, (2.0**n - 2.0) / sigma)


def _horner(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    acc = np.full(t.shape, coeffs[:, -1])
    for d in range(coeffs.shape[1] - 2, -1, -1):
        acc = acc * t + coeffs[:, d]
    return acc


def _derivative_roots(q: np.ndarray) -> list[np.ndarray]:
    """Real roots in (0,1) of each interval's derivative, batched.

    Builds the companion matrices of the (normalized) derivatives and takes
    eigenvalues; intervals whose leading coefficient vanishes fall back to
    per-row numpy roots.
    """
    n_int, order = q.shape
    deg = order - 2
    dcoef = q[:, 1:] * np.arange(1, order)[None, :]
    lead = dcoef[:, -1]
    ok = np.abs(lead) > 0.0
    roots = [np.full(n_int, -1.0) for _ in range(deg)]
    if ok.any():
        comp = np.zeros((int(ok.sum()), deg, deg))
        comp[:, 1:, :-1] = np.eye(deg - 1)
        comp[:, :, -1] = -dcoef[ok, :-1] / lead[ok, None]
        ev = np.linalg.eigvals(comp)
        real = np.where(
            np.abs(ev.imag) <= 1e-9 * (1.0 + np.abs(ev.real)), ev.real, -1.0
        )
        idx = np.flatnonzero(ok)
        for j in range(deg):
            roots[j][idx] = real[:, j]
    for i in np.flatnonzero(~ok):
        rr = np.roots(dcoef[i, ::-1])
        rr = [float(r.real) for r in rr if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real))]
        for j, r in enumerate(rr[:deg]):
            roots[j][i] = r
    return roots
