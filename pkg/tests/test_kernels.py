"""Both kernel backends must agree with exact (fsum) reductions."""

import math

import numpy as np
import pytest

from lcentropy._kernels import _ref

try:
    from lcentropy._kernels import _fast
    BACKENDS = [_ref, _fast]
except ImportError:
    BACKENDS = [_ref]

pytestmark = pytest.mark.parametrize("K", BACKENDS, ids=lambda m: m.BACKEND)


def _nasty_vector(rng, n=20000):
    # wide dynamic range with sign-free content, stresses compensation
    mags = rng.uniform(-30, 0, n)
    return np.ascontiguousarray(10.0 ** mags * rng.uniform(0.5, 1.5, n))


def test_sum_comp(K):
    rng = np.random.default_rng(1)
    x = _nasty_vector(rng)
    exact = math.fsum(x)
    assert abs(K.sum_comp(x) - exact) <= 4 * np.finfo(float).eps * abs(exact)


def test_dot_comp(K):
    rng = np.random.default_rng(2)
    x = _nasty_vector(rng, 5000)
    y = np.ascontiguousarray(rng.uniform(0.0, 2.0, 5000))
    exact = math.fsum([a * b for a, b in zip(x, y)])
    assert abs(K.dot_comp(x, y) - exact) <= 1e-13 * abs(exact)


def test_xlogx_sum(K):
    rng = np.random.default_rng(3)
    w = _nasty_vector(rng, 3000)
    w = np.ascontiguousarray(w / math.fsum(w))
    exact = math.fsum([-v * math.log(v) for v in w])
    assert abs(K.xlogx_sum(w) - exact) <= 1e-12 * abs(exact)
    with_zeros = np.ascontiguousarray(np.concatenate([[0.0], w, [0.0]]))
    assert abs(K.xlogx_sum(with_zeros) - exact) <= 1e-12 * abs(exact)


def test_abs_step_and_min_overlap(K):
    w = np.ascontiguousarray([0.1, 0.4, 0.3, 0.2])
    # |0.1| + |0.3| + |-0.1| + |-0.1| + |-0.2|
    assert K.abs_step_sum(w) == pytest.approx(0.8, abs=1e-15)
    assert K.min_overlap_sum(w) == pytest.approx(0.1 + 0.3 + 0.2, abs=1e-15)
    single = np.ascontiguousarray([1.0])
    assert K.abs_step_sum(single) == pytest.approx(2.0, abs=0)
    assert K.min_overlap_sum(single) == 0.0


def test_moments(K):
    rng = np.random.default_rng(4)
    w = rng.uniform(0, 1, 1000)
    w = np.ascontiguousarray(w / w.sum())
    k0 = -137
    mu_exact = math.fsum([(k0 + i) * v for i, v in enumerate(w)])
    assert K.first_moment(w, float(k0)) == pytest.approx(mu_exact, abs=1e-12)
    var_exact = math.fsum([(k0 + i - mu_exact) ** 2 * v for i, v in enumerate(w)])
    assert K.second_central_moment(w, float(k0), mu_exact) == pytest.approx(
        var_exact, rel=1e-13
    )


def test_convolve_direct_matches_numpy(K):
    rng = np.random.default_rng(5)
    a = np.ascontiguousarray(rng.uniform(0, 1, 300))
    b = np.ascontiguousarray(rng.uniform(0, 1, 170))
    got = np.asarray(K.convolve_direct(a, b))
    ref = np.convolve(a, b)
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=0)


def test_convolve_direct_deep_tails_relative_accuracy(K):
    # positive-term accumulation keeps relative accuracy at any magnitude
    n = 200
    a = np.ascontiguousarray(np.exp(-0.5 * np.arange(float(n))))
    got = np.asarray(K.convolve_direct(a, a))
    k = np.arange(got.size)
    pairs = np.minimum(k, n - 1) - np.maximum(0, k - (n - 1)) + 1
    exact = pairs * np.exp(-0.5 * k)  # sum over i+j=k of e^{-(i+j)/2}
    np.testing.assert_allclose(got, exact, rtol=1e-12)


def test_quad_xlogx_constant_and_triangle(K):
    nodes32, w32 = np.polynomial.legendre.leggauss(32)
    nodes64, w64 = np.polynomial.legendre.leggauss(64)
    x32 = np.ascontiguousarray((nodes32 + 1) / 2)
    ww32 = np.ascontiguousarray(w32 / 2)
    x64 = np.ascontiguousarray((nodes64 + 1) / 2)
    ww64 = np.ascontiguousarray(w64 / 2)

    # constant c on one interval: integral of -c log c
    c = 0.3
    coeffs = np.ascontiguousarray([[c, 0.0]])
    val, disc, under = K.quad_xlogx(coeffs, x32, ww32, x64, ww64, 1e-300)
    assert val == pytest.approx(-c * math.log(c), abs=1e-14)
    assert disc < 1e-14
    assert under == 0.0

    # triangle: pieces t and 1-t, total integral of -f log f is 1/2
    coeffs = np.ascontiguousarray([[0.0, 1.0], [1.0, -1.0]])
    val, disc, under = K.quad_xlogx(coeffs, x32, ww32, x64, ww64, 1e-300)
    assert val == pytest.approx(0.5, abs=1e-6)
    assert abs(val - 0.5) <= disc + 1e-12

    # underflow floor branch
    coeffs = np.ascontiguousarray([[1e-310, 0.0]])
    val, disc, under = K.quad_xlogx(coeffs, x32, ww32, x64, ww64, 1e-300)
    assert val == 0.0 and disc == 0.0
    assert 0 < under < 1e-300


def test_backends_agree_on_quadrature(K):
    rng = np.random.default_rng(6)
    coeffs = np.ascontiguousarray(rng.uniform(0, 0.2, (50, 4)))
    nodes32, w32 = np.polynomial.legendre.leggauss(32)
    x = np.ascontiguousarray((nodes32 + 1) / 2)
    w = np.ascontiguousarray(w32 / 2)
    val, disc, under = K.quad_xlogx(coeffs, x, w, x, w, 1e-300)
    ref_val, ref_disc, _ = _ref.quad_xlogx(coeffs, x, w, x, w, 1e-300)
    assert val == pytest.approx(ref_val, rel=1e-13)
    assert disc == pytest.approx(ref_disc, abs=1e-13)
