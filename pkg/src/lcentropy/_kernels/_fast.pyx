# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: compensated reductions, direct convolution, quadrature.

Same API as _ref.py.  All accumulations use Neumaier compensation in strict
index order, so results are deterministic and within a few ulps of the
exactly rounded reference backend.
"""

from libc.math cimport log, fabs

import numpy as np

BACKEND = "compiled"


cdef inline double _neu_add(double s, double x, double* comp) nogil:
    cdef double t = s + x
    if fabs(s) >= fabs(x):
        comp[0] += (s - t) + x
    else:
        comp[0] += (x - t) + s
    return t


def sum_comp(const double[::1] x):
    """Compensated sum of a 1-D float array."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        s = _neu_add(s, x[i], &c)
    return s + c


def dot_comp(const double[::1] x, const double[::1] y):
    """Compensated sum of elementwise products."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        s = _neu_add(s, x[i] * y[i], &c)
    return s + c


def xlogx_sum(const double[::1] w):
    """Sum of -w*log(w) over strictly positive entries, compensated."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        if w[i] > 0.0:
            s = _neu_add(s, -w[i] * log(w[i]), &c)
    return s + c


def abs_step_sum(const double[::1] w):
    """Sum of |w[k] - w[k-1]| with zero padding at both ends (equals 2*TV)."""
    cdef double s = 0.0, c = 0.0, prev = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        s = _neu_add(s, fabs(w[i] - prev), &c)
        prev = w[i]
    s = _neu_add(s, prev, &c)
    return s + c


def min_overlap_sum(const double[::1] w):
    """Sum of min(w[k], w[k+1]) over adjacent stored pairs (the q sum)."""
    cdef double s = 0.0, c = 0.0, m
    cdef Py_ssize_t i
    for i in range(w.shape[0] - 1):
        m = w[i] if w[i] < w[i + 1] else w[i + 1]
        s = _neu_add(s, m, &c)
    return s + c


def first_moment(const double[::1] w, double k0):
    """Sum of (k0 + i) * w[i], compensated."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        s = _neu_add(s, (k0 + i) * w[i], &c)
    return s + c


def second_central_moment(const double[::1] w, double k0, double mu):
    """Sum of (k0 + i - mu)^2 * w[i], compensated."""
    cdef double s = 0.0, c = 0.0, d
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        d = (k0 - mu) + i
        s = _neu_add(s, d * d * w[i], &c)
    return s + c


def convolve_direct(const double[::1] a, const double[::1] b):
    """Dense linear convolution with per-output compensated accumulation."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t nout = na + nb - 1
    out_arr = np.zeros(nout, dtype=np.float64)
    cdef double[::1] out = out_arr
    comp_arr = np.zeros(nout, dtype=np.float64)
    cdef double[::1] comp = comp_arr
    cdef Py_ssize_t i, j, k
    cdef double prod, t
    with nogil:
        for i in range(na):
            if a[i] == 0.0:
                continue
            for j in range(nb):
                k = i + j
                prod = a[i] * b[j]
                t = out[k] + prod
                if fabs(out[k]) >= fabs(prod):
                    comp[k] += (out[k] - t) + prod
                else:
                    comp[k] += (prod - t) + out[k]
                out[k] = t
    for i in range(nout):
        out[i] += comp[i]
    return out_arr


def quad_xlogx(const double[:, ::1] coeffs,
               const double[::1] nodes_lo, const double[::1] weights_lo,
               const double[::1] nodes_hi, const double[::1] weights_hi,
               double floor):
    """Integrate -f log f per unit interval for piecewise polynomials.

    Returns (value, discrepancy_sum, underflow_bound); see _ref.quad_xlogx.
    """
    cdef Py_ssize_t n_int = coeffs.shape[0], deg = coeffs.shape[1]
    cdef Py_ssize_t klo = nodes_lo.shape[0], khi = nodes_hi.shape[0]
    cdef double val = 0.0, val_c = 0.0
    cdef double disc = 0.0, disc_c = 0.0
    cdef double under = 0.0, under_c = 0.0
    cdef double fmax, i_lo, i_lo_c, i_hi, i_hi_c, v, x
    cdef Py_ssize_t i, j, d
    with nogil:
        for i in range(n_int):
            fmax = 0.0
            for d in range(deg):
                fmax += fabs(coeffs[i, d])
            if fmax <= 0.0:
                continue
            if fmax <= floor:
                under = _neu_add(under, -fmax * log(fmax), &under_c)
                continue
            i_lo = 0.0
            i_lo_c = 0.0
            for j in range(klo):
                x = nodes_lo[j]
                v = coeffs[i, deg - 1]
                for d in range(deg - 2, -1, -1):
                    v = v * x + coeffs[i, d]
                if v > 0.0:
                    i_lo = _neu_add(i_lo, -v * log(v) * weights_lo[j], &i_lo_c)
            i_lo += i_lo_c
            i_hi = 0.0
            i_hi_c = 0.0
            for j in range(khi):
                x = nodes_hi[j]
                v = coeffs[i, deg - 1]
                for d in range(deg - 2, -1, -1):
                    v = v * x + coeffs[i, d]
                if v > 0.0:
                    i_hi = _neu_add(i_hi, -v * log(v) * weights_hi[j], &i_hi_c)
            i_hi += i_hi_c
            val = _neu_add(val, i_hi, &val_c)
            disc = _neu_add(disc, fabs(i_hi - i_lo), &disc_c)
    return val + val_c, disc + disc_c, under + under_c
