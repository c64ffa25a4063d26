"""
Unit Tests for CoverageAnalyzer
"""

import math

import numpy as np
import pytest

from analyzers import CoverageAnalyzer
from models import ConfigError


class TestStudentize:
    """Errors and coverage counts."""

    def test_zero_stderr_dropped(self):
        errors = CoverageAnalyzer.studentize([0.6, 0.5, 0.7], [0.1, 0.0, 0.05], 0.5)
        np.testing.assert_allclose(errors, [1.0, 4.0])

    def test_coverage_rate(self):
        rate = CoverageAnalyzer.coverage_rate([0.1, 0.6, 0.3, 0.0], [0.4, 0.9, 0.5, 0.2], 0.35)
        assert rate == pytest.approx(0.5)

    def test_empty_coverage(self):
        assert math.isnan(CoverageAnalyzer.coverage_rate([], [], 0.5))


class TestSummarize:
    """End-to-end summary of replicated estimates."""

    def test_calibrated_replicates(self):
        rng = np.random.default_rng(4)
        truth, se = 0.3, 0.02
        estimates = truth + se * rng.standard_normal(400)
        summary = CoverageAnalyzer(ad_draws=199).summarize(
            estimates, np.full(400, se), estimates - 1.96 * se, estimates + 1.96 * se, truth, n_failed=3,
        )
        assert summary.n_replicates == 403
        assert summary.n_ok == 400
        assert summary.coverage == pytest.approx(0.95, abs=0.04)
        assert summary.mean_error == pytest.approx(0.0, abs=0.2)
        assert summary.sd_error == pytest.approx(1.0, abs=0.1)
        assert 0.0 <= summary.ad_pvalue <= 1.0
        assert set(summary.as_row()) >= {'coverage', 'ad_pvalue', 'failed'}

    def test_skewed_errors_fail_normality(self):
        rng = np.random.default_rng(9)
        estimates = rng.exponential(size=300)
        summary = CoverageAnalyzer(ad_draws=199).summarize(
            estimates, np.ones(300), estimates - 2, estimates + 2, 1.0,
        )
        assert not summary.normal_at(0.01)

    def test_too_few_for_normality(self):
        summary = CoverageAnalyzer().summarize([0.1, 0.2], [0.1, 0.1], [0.0, 0.0], [0.3, 0.4], 0.15)
        assert math.isnan(summary.ad_pvalue)

    def test_column_lengths(self):
        with pytest.raises(ConfigError):
            CoverageAnalyzer().summarize([0.1, 0.2], [0.1], [0.0, 0.0], [0.3, 0.4], 0.15)


class TestKolmogorovSmirnov:
    """Critical values and sup distances."""

    def test_one_and_two_sample(self):
        assert CoverageAnalyzer.ks_critical_value(100, level=0.05) == pytest.approx(0.1358, abs=1e-3)
        assert CoverageAnalyzer.ks_critical_value(200, 200, level=0.05) == pytest.approx(0.1358, abs=1e-3)

    def test_invalid_level(self):
        with pytest.raises(ConfigError):
            CoverageAnalyzer.ks_critical_value(100, level=1.5)

    def test_sup_distance(self):
        assert CoverageAnalyzer.sup_distance([0.1, 0.5, 0.9], [0.2, 0.2, 0.9]) == pytest.approx(0.3)
