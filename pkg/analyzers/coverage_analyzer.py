"""
Coverage Analyzer - Studentized errors, confidence-interval coverage and
normality diagnostics for replicated estimation runs
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from models.errors import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class CoverageSummary:
    """
    Aggregate of one coverage experiment.

    Attributes:
        n_replicates: Replicates requested
        n_failed: Replicates that raised (e.g. no exceedances)
        coverage: Fraction of successful replicates whose 95% CI holds the truth
        mean_error: Mean studentized error
        sd_error: Standard deviation of studentized errors
        ad_statistic: Anderson-Darling statistic (normal, fitted parameters)
        ad_pvalue: Monte Carlo p-value of the Anderson-Darling statistic
    """
    n_replicates: int
    n_failed: int
    coverage: float
    mean_error: float
    sd_error: float
    ad_statistic: float
    ad_pvalue: float

    @property
    def n_ok(self) -> int:
        return self.n_replicates - self.n_failed

    def normal_at(self, level: float = 0.01) -> bool:
        return self.ad_pvalue > level

    def as_row(self) -> dict:
        return {
            'replicates': self.n_replicates,
            'failed': self.n_failed,
            'coverage': self.coverage,
            'mean_error': self.mean_error,
            'sd_error': self.sd_error,
            'ad_statistic': self.ad_statistic,
            'ad_pvalue': self.ad_pvalue,
        }


class CoverageAnalyzer:
    """Summaries of replicated estimates against a known target value."""

    def __init__(self, ad_draws: int = 999, seed: int = 0):
        """
        Args:
            ad_draws: Monte Carlo draws for the Anderson-Darling p-value
            seed: Seed of the p-value simulation
        """
        self.ad_draws = ad_draws
        self.seed = seed

    @staticmethod
    def studentize(estimates: Sequence[float], stderrs: Sequence[float], truth: float) -> np.ndarray:
        """(estimate - truth) / stderr; replicates with a zero stderr are dropped."""
        est = np.asarray(estimates, dtype=float)
        se = np.asarray(stderrs, dtype=float)
        keep = se > 0
        return (est[keep] - truth) / se[keep]

    @staticmethod
    def coverage_rate(ci_lower: Sequence[float], ci_upper: Sequence[float], truth: float) -> float:
        lower = np.asarray(ci_lower, dtype=float)
        upper = np.asarray(ci_upper, dtype=float)
        if lower.size == 0:
            return math.nan
        return float(np.mean((lower <= truth) & (truth <= upper)))

    def anderson_darling(self, errors: Sequence[float]):
        """
        Anderson-Darling test of normality with fitted location and scale.

        Returns:
            Tuple of (statistic, p-value)
        """
        errors = np.asarray(errors, dtype=float)
        if errors.size < 8:
            return math.nan, math.nan
        result = stats.goodness_of_fit(
            stats.norm, errors, statistic='ad', n_mc_samples=self.ad_draws,
            random_state=np.random.default_rng(self.seed),
        )
        return float(result.statistic), float(result.pvalue)

    def summarize(self, estimates: Sequence[float], stderrs: Sequence[float],
                  ci_lower: Sequence[float], ci_upper: Sequence[float], truth: float,
                  n_failed: int = 0) -> CoverageSummary:
        """
        Coverage and normality of one experiment.

        Args:
            estimates: Successful replicate estimates
            stderrs: Their standard errors
            ci_lower: Lower 95% bounds
            ci_upper: Upper 95% bounds
            truth: Limit value the estimates target
            n_failed: Replicates that produced no estimate

        Returns:
            CoverageSummary
        """
        if not (len(estimates) == len(stderrs) == len(ci_lower) == len(ci_upper)):
            raise ConfigError("Replicate columns must have equal length")
        errors = self.studentize(estimates, stderrs, truth)
        statistic, pvalue = self.anderson_darling(errors)
        summary = CoverageSummary(
            n_replicates=len(estimates) + n_failed,
            n_failed=n_failed,
            coverage=self.coverage_rate(ci_lower, ci_upper, truth),
            mean_error=float(np.mean(errors)) if errors.size else math.nan,
            sd_error=float(np.std(errors, ddof=1)) if errors.size > 1 else math.nan,
            ad_statistic=statistic,
            ad_pvalue=pvalue,
        )
        if n_failed:
            logger.warning(f"{n_failed} of {summary.n_replicates} replicates failed")
        return summary

    @staticmethod
    def ks_critical_value(n1: int, n2: Optional[int] = None, level: float = 0.01) -> float:
        """
        Asymptotic Kolmogorov-Smirnov critical value at ``level``: one-sample
        for n1 observations, two-sample when n2 is given.
        """
        if not 0.0 < level < 1.0:
            raise ConfigError(f"Level must lie in (0, 1), got {level}")
        c = float(stats.kstwobign.isf(level))
        effective = n1 if n2 is None else n1 * n2 / (n1 + n2)
        return c / math.sqrt(effective)

    @staticmethod
    def sup_distance(first: Sequence[float], second: Sequence[float]) -> float:
        return float(np.max(np.abs(np.asarray(first, dtype=float) - np.asarray(second, dtype=float))))
