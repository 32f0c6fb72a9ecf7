"""Pmf construction, statistics, identities, and JSON interchange."""

import json
import math

import numpy as np
import pytest

from lcentropy import (
    DEFAULT_TAIL_TOL,
    IntegerPmf,
    WindowCapError,
    entropy_tail,
    from_family,
    from_weights,
    interval_probability,
    is_log_concave,
    pmf_from_json,
    pmf_to_json,
    random_log_concave_pmf,
    stats,
    tv_shift_distance,
)
from lcentropy import exact_variance, params_for_sigma
from lcentropy.pmf import tail_entropy_certificate

LOG2 = math.log(2.0)


class TestConstruction:
    def test_bernoulli_weights(self):
        p = from_family("bernoulli", {"p": 0.5})
        np.testing.assert_allclose(p.weights, [0.5, 0.5], rtol=1e-15)
        assert p.offset == 0
        assert p.tail_mass_bound == 0.0

    def test_geometric_window_and_tail(self):
        p = from_family("geometric", {"p": 0.5}, tail_tol=1e-18)
        # p(k) = 2^-(k+1); the certificate needs roughly 60 terms
        assert p.offset == 0
        assert 55 <= p.size <= 70
        assert 0 < p.tail_mass_bound <= 1e-18
        for k in (0, 1, 10):
            assert p.prob(k) == pytest.approx(2.0 ** -(k + 1), rel=1e-13)

    def test_mass_balance_invariant(self, family_instances):
        from lcentropy._kernels import sum_comp
        for _, _, p in family_instances:
            assert abs(sum_comp(p.weights) + p.tail_mass_bound - 1.0) <= 1e-15

    def test_tail_below_requested_tolerance(self):
        for tol in (1e-7, 1e-10, 1e-14):
            p = from_family("poisson", {"lam": 30.0}, tail_tol=tol)
            assert p.tail_mass_bound <= tol

    def test_zero_padding_trimmed(self):
        p = from_weights(5, [0.0, 0.0, 1.0, 0.0])
        assert p.offset == 7
        assert p.size == 1

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            from_family("geometric", {"p": 1.5})
        with pytest.raises(ValueError):
            from_family("nosuch", {"p": 0.5})
        with pytest.raises(ValueError):
            from_family("geometric", {"wrong": 0.5})
        with pytest.raises(ValueError):
            from_family("geometric", {"p": 0.5}, tail_tol=1e-3)
        with pytest.raises(ValueError):
            from_weights(0, [0.3, 0.3])  # not normalized, no tail
        with pytest.raises(ValueError):
            from_weights(0, [0.0])

    def test_window_cap(self):
        with pytest.raises(WindowCapError):
            from_family("uniform", {"m": 1 << 25})


class TestStats:
    def test_point_mass(self):
        st = stats(from_family("delta", {"k": 7}))
        assert st.entropy == 0.0
        assert st.q == 0.0
        assert st.pmax == 1.0
        assert st.nmax == 7
        assert st.variance == 0.0

    def test_uniform(self):
        st = stats(from_family("uniform", {"m": 10}))
        assert st.entropy == pytest.approx(math.log(10), abs=1e-14)
        assert st.q == pytest.approx(0.9, abs=1e-15)
        assert st.nmax == 9

    def test_uniform_large_entropy(self):
        m = 10**6
        st = stats(from_family("uniform", {"m": m}))
        assert st.entropy == pytest.approx(math.log(m), abs=1e-14)

    def test_geometric_closed_forms(self):
        st = stats(from_family("geometric", {"p": 0.5}))
        assert st.entropy == pytest.approx(2 * LOG2, abs=1e-13)
        assert st.q == pytest.approx(0.5, abs=1e-13)
        assert st.variance == pytest.approx(2.0, rel=1e-12)
        assert st.pmax == 0.5
        assert st.nmax == 0

    def test_poisson_integer_rate_ties(self):
        p = from_family("poisson", {"lam": 100.0})
        assert p.prob(99) == p.prob(100)  # exact float tie by construction
        st = stats(p)
        assert st.nmax == 100  # last maximizer
        assert st.mean == pytest.approx(100.0, abs=1e-9)
        assert st.variance == pytest.approx(100.0, rel=1e-10)

    def test_family_variances_match_closed_forms(self, family_instances):
        for name, params, p in family_instances:
            st = stats(p)
            want = exact_variance(name, params)
            assert st.variance == pytest.approx(want, rel=1e-9, abs=1e-12), (name, params)

    def test_entropy_nonnegative_and_certified(self, family_instances):
        for name, params, p in family_instances:
            st = stats(p)
            assert st.entropy >= 0.0
            assert np.isfinite(st.certified_error)
            assert st.certified_error < 1e-6

    def test_entropy_tolerance_check(self):
        p = from_family("geometric", {"p": 0.5})
        with pytest.raises(ValueError):
            stats(p, entropy_tol=1e-30)


class TestLogConcavity:
    def test_geometric_true(self):
        assert is_log_concave(from_family("geometric", {"p": 0.3})).is_log_concave

    def test_known_violation(self):
        res = is_log_concave(from_weights(0, [0.4, 0.1, 0.4, 0.1]))
        assert not res.is_log_concave
        assert res.violation_index == 1

    def test_bernoulli_convolution_window(self):
        # (1/4, 1/2, 1/4): check (1/2)^2 >= 1/4 * 1/4 directly
        res = is_log_concave(from_weights(0, [0.25, 0.5, 0.25]))
        assert res.is_log_concave

    def test_interior_zero_rejected(self):
        p = from_weights(0, [0.5, 0.0, 0.5])
        res = is_log_concave(p)
        assert not res.is_log_concave
        assert res.violation_index == 1

    def test_all_families(self, family_instances):
        for name, params, p in family_instances:
            assert is_log_concave(p, rel_tol=1e-9).is_log_concave, (name, params)

    def test_min_weight_restricts_to_resolvable_region(self):
        w = np.array([1e-18, 0.0, 0.3, 0.4, 0.3, 0.0, 1e-18])
        w = w / w.sum()
        p = from_weights(0, w, normalize=True)
        assert not is_log_concave(p).is_log_concave
        assert is_log_concave(p, min_weight=1e-12).is_log_concave


class TestShiftDistanceAndIdentities:
    def test_point_mass_tv(self):
        assert tv_shift_distance(from_family("delta", {"k": 0})) == pytest.approx(1.0)

    def test_uniform_tv(self):
        for m in (3, 10, 137):
            p = from_family("uniform", {"m": m})
            assert tv_shift_distance(p) == pytest.approx(1.0 / m, abs=1e-15)

    def test_geometric_tv_equals_one_minus_q(self):
        p = from_family("geometric", {"p": 0.5})
        st = stats(p)
        tv = tv_shift_distance(p)
        assert tv == pytest.approx(0.5, abs=1e-13)
        assert abs(tv - (1.0 - st.q)) < 1e-12

    def test_identities_across_families(self, family_instances):
        for name, params, p in family_instances:
            st = stats(p)
            assert abs(tv_shift_distance(p) - (1.0 - st.q)) < 1e-12, (name, params)
            assert abs((1.0 - st.q) - st.pmax) < 1e-12, (name, params)
            assert math.exp(-st.entropy) <= 1.0 - st.q + 1e-12, (name, params)

    def test_identities_on_random_pmfs(self, rng):
        for _ in range(150):
            p = random_log_concave_pmf(rng)
            st = stats(p)
            assert abs(tv_shift_distance(p) - (1.0 - st.q)) < 1e-12
            assert abs((1.0 - st.q) - st.pmax) < 1e-12
            assert math.exp(-st.entropy) <= 1.0 - st.q + 1e-12


class TestIntervalProbability:
    def test_point_mass(self):
        p = from_family("delta", {"k": 0})
        assert interval_probability(p, -1.0, 1.0) == 1.0

    def test_geometric_single_atom(self):
        p = from_family("geometric", {"p": 0.5})
        assert interval_probability(p, -0.5, 0.5) == pytest.approx(0.5, rel=1e-15)

    def test_geometric_prefix(self):
        p = from_family("geometric", {"p": 0.5})
        got = interval_probability(p, -math.inf, 3.5)
        assert got == pytest.approx(0.9375, rel=1e-14)  # 1 - 2^-4

    def test_bad_interval(self):
        p = from_family("delta", {"k": 0})
        with pytest.raises(ValueError):
            interval_probability(p, 1.0, 1.0)


class TestEntropyTail:
    def test_point_mass(self):
        assert entropy_tail(from_family("delta", {"k": 0}), 1.0) == 0.0

    def test_uniform(self):
        p = from_family("uniform", {"m": 10})
        want = 2.0 * 0.1 * math.log(10.0)  # only k = 8, 9 survive
        assert entropy_tail(p, 8.0) == pytest.approx(want, rel=1e-14)

    def test_geometric_closed_form(self):
        p = from_family("geometric", {"p": 0.5})
        want = 2.0**-10 * 12.0 * LOG2  # sum_{k>=10} (k+1) 2^-(k+1) log 2
        assert entropy_tail(p, 10.0) == pytest.approx(want, rel=1e-11)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            entropy_tail(from_family("delta", {"k": 0}), 0.0)

    def test_certificate_covers_true_tail(self):
        # the certified value must upper-bound the exact analytic tail
        p = from_family("geometric", {"p": 0.5}, tail_tol=1e-7)
        got = entropy_tail(p, 10.0)
        exact = 2.0**-10 * 12.0 * LOG2
        assert got >= exact - 1e-15
        assert got <= exact + 1e-5


class TestTailCertificates:
    def test_finite_support_zero_certificate(self):
        assert tail_entropy_certificate(from_family("uniform", {"m": 5})) == 0.0

    def test_geometric_certificate_bounds_truth(self):
        p = from_family("geometric", {"p": 0.5}, tail_tol=1e-10)
        hi = p.support[1]
        cert = tail_entropy_certificate(p)
        exact_tail = 2.0 ** -(hi + 1) * (2 * (hi + 2)) * LOG2  # sum beyond window
        assert exact_tail <= cert
        assert cert < 1e-7


class TestJsonInterchange:
    def test_round_trip(self):
        p = from_family("geometric", {"p": 0.3})
        q = pmf_from_json(pmf_to_json(p))
        assert q.offset == p.offset
        np.testing.assert_array_equal(q.weights, p.weights)
        assert q.tail_mass_bound == pytest.approx(p.tail_mass_bound, rel=1e-10)
        assert q.provenance["family"] == "geometric"

    def test_digits(self):
        p = from_family("bernoulli", {"p": 0.3})
        doc = pmf_to_json(p)
        # 17 significant digits requested for every weight
        w0 = json.loads(doc)["weights"][0]
        assert w0 == p.weights[0]
        assert "0.69999999999999996" in doc

    def test_malformed_rejected(self):
        with pytest.raises(ValueError):
            pmf_from_json('{"weights": [0.5, 0.5]}')
        with pytest.raises(ValueError):
            pmf_from_json('{"offset": 0, "weights": [0.5, 0.1], "tail_mass_bound": 0}')

    def test_lc_import_keeps_certificates(self):
        p = from_family("geometric", {"p": 0.3})
        q = pmf_from_json(pmf_to_json(p))
        assert q.geometric_tails
        assert np.isfinite(stats(q).certified_error)


class TestPmaxWindow:
    def test_pmax_variance_sandwich(self, family_instances):
        # 1/(4 sigma) <= pmax <= 1/sigma whenever sigma^2 >= 1
        for name, params, p in family_instances:
            st = stats(p)
            if st.variance < 1.0:
                continue
            s = st.sigma
            assert 1.0 / (4.0 * s) <= st.pmax <= 1.0 / s + 1e-12, (name, params)

    def test_mode_window_membership(self, family_instances):
        delta = 0.5
        for name, params, p in family_instances:
            st = stats(p)
            if st.sigma <= 4.0 ** (1.0 / (2 * delta)):
                continue
            half = st.sigma ** (1.5 + delta) + 1.0
            assert st.mean - half < st.nmax < st.mean + half, (name, params)


def test_random_pmfs_are_log_concave(rng):
    for _ in range(100):
        p = random_log_concave_pmf(rng)
        assert is_log_concave(p).is_log_concave
        assert p.tail_mass_bound == 0.0


def test_shifted_preserves_stats():
    p = from_family("geometric", {"p": 0.4})
    st0 = stats(p)
    st1 = stats(p.shifted(17))
    assert st1.entropy == st0.entropy
    assert st1.nmax == st0.nmax + 17
    assert st1.mean == pytest.approx(st0.mean + 17, abs=1e-12)
