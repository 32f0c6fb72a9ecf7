"""Pure-Python / numpy reference implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable (or when
LCENTROPY_BACKEND=python).  Scalar reductions go through math.fsum, which is
exactly rounded, so this backend is the accuracy reference for the compiled
one.  The compiled backend exists because these loops dominate runtime on
large windows.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# Keep chunk sizes modest so quadrature never materialises more than a few
# hundred MB of node values at once.
_CHUNK_VALUES = 4_000_000


def sum_comp(x):
    """Compensated sum of a 1-D float array."""
    return math.fsum(np.asarray(x, dtype=np.float64))


def dot_comp(x, y):
    """Compensated sum of elementwise products."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return math.fsum(x * y)


def xlogx_sum(w):
    """Sum of -w*log(w) over strictly positive entries, compensated."""
    w = np.asarray(w, dtype=np.float64)
    pos = w > 0.0
    if not pos.any():
        return 0.0
    wp = w[pos]
    return math.fsum(-wp * np.log(wp))


def abs_step_sum(w):
    """Sum of |w[k] - w[k-1]| with zero padding at both ends (equals 2*TV)."""
    w = np.asarray(w, dtype=np.float64)
    d = np.abs(np.diff(w, prepend=0.0, append=0.0))
    return math.fsum(d)


def min_overlap_sum(w):
    """Sum of min(w[k], w[k+1]) over adjacent stored pairs (the q sum)."""
    w = np.asarray(w, dtype=np.float64)
    if w.size < 2:
        return 0.0
    return math.fsum(np.minimum(w[:-1], w[1:]))


def first_moment(w, k0):
    """Sum of (k0 + i) * w[i], compensated."""
    w = np.asarray(w, dtype=np.float64)
    idx = k0 + np.arange(w.size, dtype=np.float64)
    return math.fsum(idx * w)


def second_central_moment(w, k0, mu):
    """Sum of (k0 + i - mu)^2 * w[i], compensated."""
    w = np.asarray(w, dtype=np.float64)
    d = (k0 - mu) + np.arange(w.size, dtype=np.float64)
    return math.fsum(d * d * w)


def convolve_direct(a, b):
    """Dense linear convolution of two nonnegative weight vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.convolve(a, b)


def quad_xlogx(coeffs, nodes_lo, weights_lo, nodes_hi, weights_hi, floor):
    """Integrate -f log f per unit interval for piecewise polynomials.

    coeffs[i, d] is the coefficient of t^d on interval i (local t in [0,1)).
    Each interval is evaluated with both node sets; the fine result is the
    value, the coarse/fine discrepancy accumulates into the certified error.
    Intervals whose coefficient-sum bound is below `floor` contribute only a
    closed-form x*log(1/x) bound (returned separately).

    Returns (value, discrepancy_sum, underflow_bound).
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n_int = coeffs.shape[0]
    if n_int == 0:
        return 0.0, 0.0, 0.0

    vals = []
    discs = []
    under = []
    chunk = max(1, _CHUNK_VALUES // max(len(nodes_hi), 1))
    for s in range(0, n_int, chunk):
        c = coeffs[s : s + chunk]
        fmax = np.abs(c).sum(axis=1)
        live = fmax > floor
        dead = ~live & (fmax > 0.0)
        if dead.any():
            fd = fmax[dead]
            under.append(math.fsum(-fd * np.log(fd)))
        if live.any():
            cl = c[live]
            i_lo = _gl_xlogx(cl, nodes_lo, weights_lo)
            i_hi = _gl_xlogx(cl, nodes_hi, weights_hi)
            vals.append(math.fsum(i_hi))
            discs.append(math.fsum(np.abs(i_hi - i_lo)))
    return math.fsum(vals), math.fsum(discs), math.fsum(under)


def _gl_xlogx(c, nodes, weights):
    # Horner evaluation of each interval polynomial at the nodes.
    v = np.full((c.shape[0], nodes.size), c[:, -1][:, None])
    for d in range(c.shape[1] - 2, -1, -1):
        v = v * nodes + c[:, d][:, None]
    f = np.zeros_like(v)
    pos = v > 0.0
    vp = v[pos]
    f[pos] = -vp * np.log(vp)
    return f @ weights
