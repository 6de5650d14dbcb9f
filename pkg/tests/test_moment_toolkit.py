import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ngca import moment_toolkit as mt
from ngca.instance_model import LAW_KINDS, NonGaussianLaw


class TestGaussianMoment:
    @pytest.mark.parametrize("k,expected", [(0, 1), (1, 0), (3, 0), (4, 3), (6, 15), (8, 105)])
    def test_values(self, k, expected):
        assert mt.gaussian_moment(k) == expected

    @pytest.mark.parametrize("k", range(1, 13))
    def test_against_scipy(self, k):
        assert mt.gaussian_moment(k) == pytest.approx(stats.norm.moment(k), abs=1e-9)

    @given(st.integers(1, 20))
    def test_recurrence(self, k):
        if k % 2 == 0:
            assert mt.gaussian_moment(k) == (k - 1) * mt.gaussian_moment(k - 2)


class TestEmpirical:
    def test_constant(self):
        mv = mt.empirical_moments(np.full(50, 1.5), 6)
        assert np.allclose(mv.values, 1.5 ** np.arange(1, 7))
        assert np.all(mv.std_errors == 0)

    def test_guards(self):
        with pytest.raises(ValueError):
            mt.empirical_moments(np.ones(29), 3)
        with pytest.raises(ValueError):
            mt.empirical_moments(np.ones(100), 13)

    def test_gaussian_fourth(self, rng):
        mv = mt.empirical_moments(rng.standard_normal(10**6), 4)
        assert abs(mv[4] - 3) <= 4 * mv.se(4)

    def test_uniform_fourth(self, rng):
        mv = mt.empirical_moments(rng.uniform(-math.sqrt(3), math.sqrt(3), 10**6), 4)
        assert abs(mv[4] - 1.8) <= 4 * mv.se(4)

    def test_gaussian_moment_check(self, rng):
        res = mt.gaussian_moment_check(rng.standard_normal(10**5))
        assert all(ok for _, _, ok in res.values())


class TestCumulants:
    def test_gaussian(self):
        m = [mt.gaussian_moment(k) for k in range(9)]
        kap = mt.moments_to_cumulants(m)
        assert kap[2] == pytest.approx(1.0)
        assert np.allclose(np.delete(kap, 2), 0, atol=1e-12)

    def test_uniform_excess_kurtosis(self):
        kap = mt.moments_to_cumulants(NonGaussianLaw("uniform").raw_moments)
        assert kap[4] == pytest.approx(-1.2)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=8, max_size=8))
    def test_round_trip(self, tail):
        m = np.r_[1.0, tail]
        assert np.allclose(mt.cumulants_to_moments(mt.moments_to_cumulants(m)), m, atol=1e-8, rtol=1e-8)

    def test_linear_combination_two_uniforms(self):
        u = NonGaussianLaw("uniform").raw_moments
        m = mt.linear_combination_moments([u, u], np.ones(2) / math.sqrt(2), 4)
        # E[(U1 + U2)^4] / 4 = (2 * 9/5 + 6) / 4
        assert m[4] == pytest.approx(2.4)
        assert m[2] == pytest.approx(1.0)

    def test_linear_combination_axis(self):
        law = NonGaussianLaw("laplace_truncated")
        m = mt.linear_combination_moments([law.raw_moments, NonGaussianLaw("uniform").raw_moments], [1.0, 0.0], 8)
        assert np.allclose(m, law.raw_moments[:9])


class TestMixing:
    def test_t_zero_and_one(self):
        y = NonGaussianLaw("uniform").analytic_moments
        for k in range(3, 9):
            assert mt.moment_mixing(y, 0.0, k) == 0.0
            assert mt.moment_mixing(y, 1.0, k) == pytest.approx(y[k - 1] - mt.gaussian_moment(k))

    def test_third_order_example(self):
        assert mt.moment_mixing([0.0, 1.0, 2.0], 0.5, 3) == pytest.approx(0.25)

    @pytest.mark.parametrize("kind", LAW_KINDS)
    @pytest.mark.parametrize("k", [3, 4, 5, 6])
    def test_matches_cumulant_route(self, kind, k):
        # independent path: moments of tY + sqrt(1-t^2) Z via cumulant additivity
        law = NonGaussianLaw(kind)
        g = np.array([mt.gaussian_moment(j) for j in range(13)])
        for t in (0.2, 0.5, 0.8):
            m = mt.linear_combination_moments([law.raw_moments, g], [t, math.sqrt(1 - t * t)], k)
            assert mt.moment_mixing(law.raw_moments[1:], t, k) == pytest.approx(m[k] - mt.gaussian_moment(k), abs=1e-10)

    def test_conventions_agree(self):
        y = NonGaussianLaw("two_point_smoothed").analytic_moments
        t = 0.3
        assert mt.smoothed_moment_gap(y, t, 4) == pytest.approx(mt.moment_mixing(y, math.sqrt(1 - t * t), 4))

    def test_invalid_coefficient(self):
        with pytest.raises(ValueError):
            mt.mixed_moment_gap([0, 1, 0, 3], 1.5, 4)


class TestPredictedGap:
    def test_t_zero(self):
        for k in range(3, 9):
            assert mt.predicted_smoothed_gap(0.7, k, 0.0).value == 0.7

    def test_k3_example(self):
        assert mt.predicted_smoothed_gap(1.0, 3, 0.2).value == pytest.approx(0.8 * 0.96**1.5)
        assert mt.predicted_smoothed_gap(1.0, 3, 0.2).value == pytest.approx(0.7525, abs=1e-4)

    def test_clipped(self):
        assert mt.predicted_smoothed_gap(1.0, 6, 0.9).value == 0.0

    @pytest.mark.parametrize("k", [3, 4])
    def test_dominates_bernoulli(self, k):
        for t in np.linspace(0, 0.3, 3001):
            g = mt.predicted_smoothed_gap(1.0, k, t)
            if g.value > 0 and g.bernoulli > 0:
                assert g.value >= g.bernoulli - 1e-12

    @pytest.mark.parametrize("k,t", [(5, 0.005), (6, 0.001)])
    def test_bernoulli_not_a_relaxation_for_k_ge_5(self, k, t):
        # (1 + sqrt(k-3))^k exceeds k^(k/2) once k >= 5, so the looser-looking
        # bound is actually larger near t = 0
        g = mt.predicted_smoothed_gap(1.0, k, t)
        assert (1 + math.sqrt(k - 3)) ** k > k ** (k / 2)
        assert 0 < g.value < g.bernoulli

    def test_lower_bounds_actual_gap(self):
        # exact smoothed gap of a uniform never falls below the bound at its own D
        law = NonGaussianLaw("uniform")
        D = abs(law.moment(4) - 3)
        for t in (0.0, 0.05, 0.1, 0.2):
            actual = abs(mt.smoothed_moment_gap(law.analytic_moments, t, 4))
            assert actual >= mt.predicted_smoothed_gap(D, 4, t).value - 1e-12


class TestDetectGap:
    def test_gaussian(self, rng):
        rep = mt.detect_gap(mt.empirical_moments(rng.standard_normal(10**5), 6), 0.5)
        assert rep.k_star is None

    def test_uniform(self, rng):
        rep = mt.detect_gap(mt.empirical_moments(NonGaussianLaw("uniform").sample(rng, 10**6), 4), 1.0)
        assert rep.k_star == 4
        assert rep.gap == pytest.approx(1.2, abs=0.02)

    def test_two_point(self, rng):
        law = NonGaussianLaw("two_point_smoothed", (0.1,))
        rep = mt.detect_gap(mt.empirical_moments(law.sample(rng, 10**6), 6), 1.0)
        assert rep.k_star == 4
        assert rep.gap == pytest.approx(2.0, abs=0.1)
        assert rep.gap == pytest.approx(abs(law.moment(4) - 3), abs=0.02)


class TestDecayBound:
    def test_example(self):
        assert mt.truncation_level(1.0, 1.0, 3) == pytest.approx(108.0)
        assert mt.entropy_decay_bound(1e-12, 1.0, 3, 1.0) == pytest.approx(32.4, rel=1e-9)

    def test_limit_and_monotone(self):
        assert mt.entropy_decay_bound(1e-300, 1.0, 3, 1.0) < 1e-40
        vals = [mt.entropy_decay_bound(e, 1.0, 4, 1.0) for e in (1e-9, 1e-6, 1e-3)]
        assert vals == sorted(vals)
        # decreasing in D while log(K/D) stays inside the formula
        assert mt.entropy_decay_bound(1e-6, 0.9, 4, 1.0) < mt.entropy_decay_bound(1e-6, 0.5, 4, 1.0)
