import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from sparse_rmt.errors import ConfigurationError
from sparse_rmt.stats import holm, ks_two_sample, mean_ci95, proportion


class TestKS:
    def test_identical(self, rng):
        a = rng.standard_normal(100)
        d, p = ks_two_sample(a, a.copy())
        assert d == 0 and p == 1

    def test_disjoint(self):
        d, p = ks_two_sample(np.zeros(100), np.ones(100))
        assert d == 1
        assert p < 1e-20

    def test_statistic_matches_scipy(self, rng):
        for _ in range(20):
            a = rng.standard_normal(int(rng.integers(20, 300)))
            b = rng.standard_normal(int(rng.integers(20, 300))) + 0.2
            ref = scipy.stats.ks_2samp(a, b)
            d, p = ks_two_sample(a, b)
            assert math.isclose(d, ref.statistic, rel_tol=1e-12)
            en = len(a) * len(b) / (len(a) + len(b))
            assert math.isclose(p, scipy.stats.kstwobign.sf(d * math.sqrt(en)), rel_tol=1e-9, abs_tol=1e-15)

    def test_undersized(self):
        with pytest.raises(ConfigurationError):
            ks_two_sample(np.zeros(10), np.zeros(100))

    @pytest.mark.slow
    def test_calibration(self, rng):
        rejections = sum(
            ks_two_sample(rng.standard_normal(500), rng.standard_normal(500))[1] <= 0.05 for _ in range(1000)
        )
        # binomial(1000, 0.05): 4 sigma is about 0.028
        assert 0.022 <= rejections / 1000 <= 0.078


class TestHolm:
    def test_step_down(self):
        assert holm([0.01, 0.04, 0.03], 0.05) == [True, False, False]
        assert holm([0.01, 0.02, 0.03], 0.05) == [True, True, True]

    def test_stops_at_first_acceptance(self):
        assert holm([0.2, 0.001], 0.05) == [False, True]

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
    def test_no_more_rejections_than_unadjusted(self, p):
        rej = holm(p, 0.05)
        assert sum(rej) <= sum(x <= 0.05 for x in p)
        # rejections are the smallest p-values, and include any that pass Bonferroni
        if any(rej):
            assert max(x for x, r in zip(p, rej) if r) <= min((x for x, r in zip(p, rej) if not r), default=1)
        assert all(r for x, r in zip(p, rej) if x <= 0.05 / len(p))


class TestSummaries:
    def test_constant(self):
        assert mean_ci95([3.0] * 10) == (3.0, 0.0, (3.0, 3.0), 10)

    def test_two_points(self):
        mean, std, _, n = mean_ci95([1.0, 3.0])
        assert mean == 2.0 and math.isclose(std, math.sqrt(2)) and n == 2

    def test_empty(self):
        with pytest.raises(ConfigurationError):
            mean_ci95([])

    def test_proportion(self):
        assert proportion([True, False, True, True]) == 0.75
        assert math.isnan(proportion([]))
