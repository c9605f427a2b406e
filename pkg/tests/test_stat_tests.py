import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.stats.contingency_tables import cochrans_q as sm_cochrans_q

from seqcv.stat_tests import chi_square_sf, cochran_q, column_midranks, friedman


class TestChiSquareSf:
    def test_zero_statistic(self):
        assert chi_square_sf(0.0, 3) == 1.0

    def test_matches_reference_grid(self):
        for df in (1, 2, 3, 5, 10, 30, 100):
            for x in (0.01, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 80.0, 200.0):
                ref = scipy.stats.chi2.sf(x, df)
                assert chi_square_sf(x, df) == pytest.approx(ref, abs=1e-12, rel=1e-10)

    def test_exponential_special_case(self):
        # df = 2 is an exponential tail: sf(x) = exp(-x/2)
        for x in (0.1, 3.0, 6.0, 20.0):
            assert chi_square_sf(x, 2) == pytest.approx(math.exp(-x / 2.0), rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            chi_square_sf(1.0, 0)
        with pytest.raises(ValueError):
            chi_square_sf(-1.0, 2)
        with pytest.raises(ValueError):
            chi_square_sf(float("nan"), 2)

    @given(st.floats(0.0, 500.0), st.integers(1, 60))
    @settings(max_examples=200, deadline=None)
    def test_is_a_survival_function(self, x, df):
        p = chi_square_sf(x, df)
        assert 0.0 <= p <= 1.0
        assert chi_square_sf(x + 1.0, df) <= p + 1e-15


class TestCochranQ:
    def test_hand_checked_example(self):
        m = [[1, 1, 1, 1], [0, 0, 0, 0], [1, 0, 1, 0]]
        res = cochran_q(m)
        assert res.statistic == pytest.approx(6.0, abs=1e-12)
        assert res.degrees_of_freedom == 2
        assert res.p_value == pytest.approx(math.exp(-3.0), abs=1e-9)
        assert not res.degenerate

    def test_degenerate_constant_columns(self):
        res = cochran_q([[1, 0, 1], [1, 0, 1]])
        assert res.degenerate
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_matches_statsmodels_on_random_matrices(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 100:
            k = int(rng.integers(2, 6))
            r = int(rng.integers(4, 30))
            m = (rng.random((k, r)) < rng.uniform(0.2, 0.8)).astype(float)
            ours = cochran_q(m)
            if ours.degenerate:
                continue
            ref = sm_cochrans_q(m.T, return_object=True)
            assert ours.statistic == pytest.approx(ref.statistic, abs=1e-8)
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-8)
            checked += 1

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            cochran_q([[0.5, 1.0], [0.0, 1.0]])

    def test_rejects_single_row(self):
        with pytest.raises(ValueError):
            cochran_q([[1, 0, 1]])

    @given(st.integers(2, 5), st.integers(3, 12), st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_row_permutation_invariance(self, k, r, seed):
        rng = np.random.default_rng(seed)
        m = (rng.random((k, r)) < 0.5).astype(float)
        res = cochran_q(m)
        perm = rng.permutation(k)
        res2 = cochran_q(m[perm])
        assert res2.statistic == pytest.approx(res.statistic, abs=1e-12)
        assert 0.0 <= res.p_value <= 1.0


class TestFriedman:
    def test_constant_rank_example(self):
        m = [[1.0] * 10, [2.0] * 10, [3.0] * 10]
        res = friedman(m)
        assert res.statistic == pytest.approx(20.0, abs=1e-12)
        assert res.degrees_of_freedom == 2
        assert res.p_value == pytest.approx(math.exp(-10.0), abs=1e-9)

    def test_matches_scipy_without_ties(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            k = int(rng.integers(3, 7))
            r = int(rng.integers(4, 25))
            m = rng.normal(size=(k, r))
            ours = friedman(m)
            ref_stat, ref_p = scipy.stats.friedmanchisquare(*[m[i] for i in range(k)])
            assert ours.statistic == pytest.approx(ref_stat, abs=1e-8)
            assert ours.p_value == pytest.approx(ref_p, abs=1e-8)

    def test_tie_corrected_against_direct_formula(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            k = int(rng.integers(2, 6))
            r = int(rng.integers(4, 20))
            m = rng.integers(0, 3, size=(k, r)).astype(float)
            res = friedman(m)
            ranks = np.column_stack([scipy.stats.rankdata(m[:, j]) for j in range(r)])
            row_sums = ranks.sum(axis=1)
            num = (k - 1) * np.sum((row_sums - r * (k + 1) / 2.0) ** 2)
            den = np.sum(ranks**2) - r * k * (k + 1) ** 2 / 4.0
            if den <= 0:
                assert res.degenerate and res.p_value == 1.0
            else:
                assert res.statistic == pytest.approx(num / den, abs=1e-10)

    def test_fully_tied_is_degenerate(self):
        res = friedman([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
        assert res.degenerate
        assert res.p_value == 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            friedman([[1.0, float("inf")], [0.0, 1.0]])


class TestColumnMidranks:
    def test_matches_scipy_rankdata(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            v = rng.integers(0, 5, size=int(rng.integers(2, 20))).astype(float)
            assert np.allclose(column_midranks(v), scipy.stats.rankdata(v))

    def test_simple_ties(self):
        assert np.allclose(column_midranks([2.0, 1.0, 2.0]), [2.5, 1.0, 2.5])
