import math

import numpy as np
import pytest

from tplab import (
    DomainError,
    GaussianSeries,
    SampleSpec,
    estimate_cosh_trace,
    estimate_tail,
    estimate_trace_moment,
    normal_stream,
    sample_standard_normal,
    wilson_interval,
)


def scalar_series(a=1.0):
    return GaussianSeries(np.array([[[float(a)]]])).as_field()


class TestStreams:
    def test_replay_is_identical(self):
        a = sample_standard_normal(16, normal_stream(123, 4))
        b = sample_standard_normal(16, normal_stream(123, 4))
        np.testing.assert_array_equal(a, b)

    def test_streams_are_distinct(self):
        a = sample_standard_normal(16, normal_stream(123, 0))
        b = sample_standard_normal(16, normal_stream(123, 1))
        assert not np.array_equal(a, b)

    def test_draw_indexing_deterministic(self):
        s = normal_stream(9, 2)
        first = sample_standard_normal(8, s)
        again = sample_standard_normal(8, normal_stream(9, 2))
        np.testing.assert_array_equal(first, again)

    def test_mean_within_clt_band(self):
        xs = normal_stream(7, 0).standard_normal((10 ** 6, 3))
        assert np.max(np.abs(xs.mean(axis=0))) <= 4.0 / math.sqrt(10 ** 6)

    def test_covariance_near_identity(self):
        xs = normal_stream(8, 0).standard_normal((10 ** 6, 4))
        cov = xs.T @ xs / xs.shape[0]
        assert np.linalg.norm(cov - np.eye(4)) <= 0.01 * np.linalg.norm(np.eye(4))


class TestSampleSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            SampleSpec(n=0, seed=1)
        with pytest.raises(DomainError):
            SampleSpec(n=10, seed=1, workers=0)
        with pytest.raises(DomainError):
            SampleSpec(n=11, seed=1, antithetic=True)


class TestTraceMoment:
    def test_zero_field_zero_width(self):
        est = estimate_trace_moment(scalar_series(0.0), 1, SampleSpec(n=1000, seed=2))
        assert est.value == 0.0 and est.ci_low == 0.0 and est.ci_high == 0.0

    def test_second_moment_oracle(self):
        a = 1.7
        est = estimate_trace_moment(scalar_series(a), 1, SampleSpec(n=100000, seed=3))
        assert est.ci_low <= a ** 2 <= est.ci_high

    def test_fourth_moment_oracle(self):
        a = 1.7
        est = estimate_trace_moment(scalar_series(a), 2, SampleSpec(n=100000, seed=3))
        assert est.ci_low <= 3 * a ** 4 <= est.ci_high

    def test_orthogonal_conjugation_invariance(self):
        rng = np.random.default_rng(15)
        coefs = rng.standard_normal((3, 4, 4))
        coefs = 0.5 * (coefs + coefs.transpose(0, 2, 1))
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        spec = SampleSpec(n=20000, seed=77)
        base = estimate_trace_moment(GaussianSeries(coefs).as_field(), 2, spec)
        conj = estimate_trace_moment(
            GaussianSeries(np.einsum("ab,kbc,dc->kad", q, coefs, q)).as_field(), 2, spec)
        assert conj.value == pytest.approx(base.value, abs=1e-12 * (1 + abs(base.value)))

    def test_worker_count_does_not_change_bits(self):
        f = scalar_series(1.3)
        one = estimate_trace_moment(f, 2, SampleSpec(n=50000, seed=5, workers=1))
        four = estimate_trace_moment(f, 2, SampleSpec(n=50000, seed=5, workers=4))
        assert one == four

    def test_tpl_threads_env_caps_workers(self, monkeypatch):
        f = scalar_series(1.3)
        base = estimate_trace_moment(f, 2, SampleSpec(n=50000, seed=5, workers=1))
        monkeypatch.setenv("TPL_THREADS", "1")
        capped = estimate_trace_moment(f, 2, SampleSpec(n=50000, seed=5, workers=8))
        assert capped == base

    def test_antithetic_pairing(self):
        # the statistic is even in X, so pair means equal the plain values
        # computed from half the draws; the mechanism must stay deterministic
        f = scalar_series(1.0)
        est = estimate_trace_moment(f, 1, SampleSpec(n=20000, seed=9, antithetic=True))
        assert est.n == 10000
        assert est.ci_low <= 1.0 <= est.ci_high

    def test_q_below_one_rejected(self):
        with pytest.raises(DomainError):
            estimate_trace_moment(scalar_series(), 0.5, SampleSpec(n=100, seed=1))

    def test_field_without_batch_evaluator(self):
        from tplab import SmoothField
        plain = SmoothField(ambient_dim=1, dim=1, func=lambda x: 2.0 * x[:1, None])
        est = estimate_trace_moment(plain, 1, SampleSpec(n=20000, seed=13))
        assert est.ci_low <= 4.0 <= est.ci_high


class TestTail:
    def test_threshold_zero_survival_one(self):
        ests = estimate_tail(scalar_series(), np.zeros((1, 1)), [0.0],
                             SampleSpec(n=5000, seed=4))
        assert ests[0].value == 1.0

    def test_monotone_in_threshold(self):
        ests = estimate_tail(scalar_series(), np.zeros((1, 1)), [0.0, 0.5, 1.0, 2.0],
                             SampleSpec(n=20000, seed=4))
        vals = [e.value for e in ests]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_normal_two_sided_oracle(self):
        # P(|X| >= 1.96) ~ 0.05 for a standard normal
        ests = estimate_tail(scalar_series(), np.zeros((1, 1)), [1.96],
                             SampleSpec(n=100000, seed=6))
        assert ests[0].ci_low <= 0.05 <= ests[0].ci_high

    def test_descending_thresholds_rejected(self):
        with pytest.raises(DomainError):
            estimate_tail(scalar_series(), np.zeros((1, 1)), [1.0, 0.5],
                          SampleSpec(n=10000, seed=1))

    def test_antithetic_refused(self):
        with pytest.raises(DomainError):
            estimate_tail(scalar_series(), np.zeros((1, 1)), [1.0],
                          SampleSpec(n=10000, seed=1, antithetic=True))

    def test_worker_invariance(self):
        one = estimate_tail(scalar_series(), np.zeros((1, 1)), [1.0, 2.0],
                            SampleSpec(n=30000, seed=8, workers=1))
        four = estimate_tail(scalar_series(), np.zeros((1, 1)), [1.0, 2.0],
                             SampleSpec(n=30000, seed=8, workers=4))
        assert one == four


class TestCoshTrace:
    def test_field_equal_center_gives_dimension(self):
        # zero series: f(X) = 0 = center, so tr cosh = d exactly
        f = GaussianSeries(np.zeros((1, 2, 2))).as_field()
        est = estimate_cosh_trace(f, np.zeros((2, 2)), 1.0, SampleSpec(n=100, seed=1))
        assert est.value == 2.0 and est.ci_low == 2.0 and est.ci_high == 2.0

    def test_theta_zero_gives_dimension(self):
        f = scalar_series(2.0)
        est = estimate_cosh_trace(f, np.zeros((1, 1)), 0.0, SampleSpec(n=100, seed=1))
        assert est.value == 1.0 and est.ci_low == est.ci_high == 1.0

    @pytest.mark.filterwarnings("ignore:empirical kurtosis")
    def test_gaussian_mgf_oracle(self):
        # E cosh(X/2) = exp(1/8) for X standard normal
        f = scalar_series(1.0)
        est = estimate_cosh_trace(f, np.zeros((1, 1)), 0.5, SampleSpec(n=200000, seed=10))
        assert est.ci_low <= math.exp(0.125) <= est.ci_high

    def test_huge_theta_does_not_raise(self):
        f = scalar_series(1.0)
        est = estimate_cosh_trace(f, np.zeros((1, 1)), 5000.0, SampleSpec(n=2000, seed=11))
        assert math.isinf(est.value)

    def test_heavy_tail_warning_and_meta(self):
        f = scalar_series(1.0)
        with pytest.warns(RuntimeWarning, match="kurtosis"):
            est = estimate_cosh_trace(f, np.zeros((1, 1)), 3.0, SampleSpec(n=50000, seed=12))
        assert est.meta["heavy_tail_warning"]


class TestWilson:
    def test_basic_properties(self):
        lo, hi = wilson_interval(50, 100, 0.99)
        assert 0.0 <= lo <= 0.5 <= hi <= 1.0
        assert wilson_interval(0, 0) == (0.0, 1.0)
        lo0, hi0 = wilson_interval(0, 1000, 0.99)
        assert lo0 == 0.0 and hi0 > 0.0

    @pytest.mark.parametrize("p", [0.5, 0.1, 0.01])
    def test_coverage_calibration(self, p):
        # 500 repetitions of Bernoulli(p) batteries at N=10^4; the 99%
        # interval must cover the truth in at least 97% of them
        rng = np.random.default_rng(12321)
        n, reps = 10 ** 4, 500
        ks = rng.binomial(n, p, size=reps)
        covered = 0
        for k in ks:
            lo, hi = wilson_interval(int(k), n, 0.99)
            covered += lo <= p <= hi
        assert covered / reps >= 0.97
