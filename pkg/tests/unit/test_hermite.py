"""
Unit Tests for HermiteAnalyzer
"""

import math

import numpy as np
import pytest

from analyzers import HermiteAnalyzer
from models import AcfModel, ConfigError, ExtremeSet, LimitQuery, NumericError, UnsupportedError


@pytest.fixture
def analyzer():
    return HermiteAnalyzer()


class TestPolynomials:
    """Probabilists' Hermite polynomials."""

    def test_low_degrees(self):
        assert HermiteAnalyzer.hermite_poly(0, 3.0) == 1.0
        assert HermiteAnalyzer.hermite_poly(2, 3.0) == pytest.approx(8.0)
        assert HermiteAnalyzer.hermite_poly(3, 2.0) == pytest.approx(2.0)

    def test_vectorized(self):
        x = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(HermiteAnalyzer.hermite_poly(2, x), x ** 2 - 1)

    def test_negative_degree(self):
        with pytest.raises(ConfigError):
            HermiteAnalyzer.hermite_poly(-1, 0.0)


class TestExpansions:
    """Coefficients J(q) = E[f(X) H_q(X)]."""

    def test_square_has_rank_two(self, analyzer):
        expansion = analyzer.hermite_coeffs_1d(lambda x: x ** 2, q_max=4)
        assert expansion.rank == 2
        assert expansion.coefficient(0) == pytest.approx(1.0)
        assert expansion.coefficient(2) == pytest.approx(2.0)
        assert expansion.parseval_sum() == pytest.approx(expansion.second_moment)

    def test_identity_has_rank_one(self, analyzer):
        assert analyzer.hermite_coeffs_1d(lambda x: x, q_max=3).rank == 1

    def test_abs_value(self, analyzer):
        """|x| is even: J(1) = 0, J(2) = sqrt(2/pi)."""
        expansion = analyzer.hermite_coeffs_1d(np.abs, q_max=4)
        assert expansion.rank == 2
        assert expansion.coefficient(2) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-2)

    def test_constant_is_degenerate(self, analyzer):
        expansion = analyzer.hermite_coeffs_1d(lambda x: np.full_like(x, 3.0), q_max=4)
        assert expansion.degenerate

    def test_overflow_raises(self, analyzer):
        with pytest.raises(NumericError):
            analyzer.hermite_coeffs_1d(lambda x: np.exp(x ** 4), q_max=2)

    def test_product_rank_two(self, analyzer):
        expansion = analyzer.hermite_coeffs_nd(lambda p: p[:, 0] * p[:, 1], np.eye(2), q_max=3)
        assert expansion.rank == 2
        assert expansion.coefficient(1, 1) == pytest.approx(1.0)
        assert expansion.coefficient(1, 0) == pytest.approx(0.0, abs=1e-10)

    def test_correlated_linear(self, analyzer):
        cov = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert analyzer.hermite_coeffs_nd(lambda p: p[:, 0], cov, q_max=2).rank == 1

    def test_dimension_cap(self, analyzer):
        with pytest.raises(UnsupportedError):
            analyzer.hermite_coeffs_nd(lambda p: p[:, 0], np.eye(4), q_max=2)


class TestRankOfG:
    """Ranks of the limit integrand in the latent variables."""

    def test_exp_volatility_rank_one(self, analyzer, ar1_exp_config):
        query = LimitQuery(ar1_exp_config, ExtremeSet.box(1), y_grid=(1.0, 2.0, 4.0))
        report = analyzer.rank_of_G(query, q_max=3)
        assert report.tau_a == 1
        assert report.tau_star == 1
        assert len(report.ranks_on_grid) == 3

    def test_constant_volatility_degenerate(self, analyzer, iid_config):
        query = LimitQuery(iid_config, ExtremeSet.box(1), y_grid=(1.0, 2.0))
        assert analyzer.rank_of_G(query, q_max=2).degenerate


class TestVarianceRate:
    """var(n^-1 sum f(X_j)) against the rank-dependent rate."""

    def test_expected_slope(self):
        assert HermiteAnalyzer.expected_slope(AcfModel.fgn(0.8), 1) == pytest.approx(-0.4)
        assert HermiteAnalyzer.expected_slope(AcfModel.fgn(0.8), 3) == pytest.approx(-1.0)
        assert HermiteAnalyzer.expected_slope(AcfModel.ar1(0.5), 2) == -1.0
        with pytest.raises(UnsupportedError):
            HermiteAnalyzer.expected_slope(AcfModel.custom([1.0, 0.3]), 1)

    def test_short_memory_rate(self, analyzer):
        report = analyzer.arcones_check(lambda x: x, 1, AcfModel.ar1(0.5), [128, 1024, 8192],
                                        replicates=200, seed=5, threads=2)
        assert report.slope == pytest.approx(-1.0, abs=0.15)
        assert report.trend_ok
        assert len(report.to_rows()) == 3

    def test_thread_count_does_not_change_result(self, analyzer):
        args = (lambda x: x ** 2 - 1, 2, AcfModel.fgn(0.7), [64, 256])
        one = analyzer.arcones_check(*args, replicates=10, seed=3, threads=1)
        four = analyzer.arcones_check(*args, replicates=10, seed=3, threads=4)
        np.testing.assert_array_equal(one.variances, four.variances)

    def test_n_list_must_increase(self, analyzer):
        with pytest.raises(ConfigError):
            analyzer.arcones_check(lambda x: x, 1, AcfModel.ar1(0.5), [256, 128], replicates=5, seed=0)
