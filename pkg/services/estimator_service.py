"""
Estimator Service.

Empirical conditional extremogram estimators on an observed series:

- rho_hat: sum_j 1{Y_j..Y_{j+h-1} in u_hat A} 1{Y_{j+m}..Y_{j+m+h'} in B} / sum_j 1{...}
- psi_hat_curve: the same with B = (-inf, y]^(h'+1) over a y grid
- sum_cdf_curve / psi_star_hat: target Y_{j+m} + ... + Y_{j+m+h'} <= y
- rho_tilde: windows taken in disjoint blocks of h
- lambda_hat: sum set with h = 2 and a single target

u_hat = Y_(n:n-k) is the (n-k)-th smallest of the first n observations.
Uncertainty uses the limiting variance normed by sqrt(n g_C(k/n) mu_C).
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from models.cones import ExtremeSet, SetFamily
from models.errors import ConfigError, InputError, InsufficientExceedancesError
from models.estimates import Estimate, EstimateCurve, EstimatorConfig, IntervalBox, VarianceReport, grid_tuple
from utils.logger import get_logger

logger = get_logger(__name__)

Z_95 = 1.959963984540054


@dataclass(frozen=True)
class WindowSelection:
    """One exceedance pass over the series, shared by every target evaluated on it."""
    u_hat: float
    k: int
    n: int
    starts: np.ndarray
    selected: np.ndarray
    targets: np.ndarray

    @property
    def denominator(self) -> int:
        return int(self.selected.sum())


class EstimatorService:
    """
    Ratio estimators of the conditional extremogram.
    """

    @classmethod
    def order_statistic_threshold(cls, y, k: int) -> float:
        """
        Y_(n:n-k), the (n-k)-th smallest of y (1-based).

        Args:
            y: Observations
            k: Number of observations allowed above the threshold

        Returns:
            Threshold value
        """
        values = np.asarray(y, dtype=float).ravel()
        n = values.size
        if not 1 <= k < n:
            raise ConfigError(f"k must satisfy 1 <= k < n (k={k}, n={n})", k=int(k), n=int(n))
        return float(np.partition(values, n - k - 1)[n - k - 1])

    @classmethod
    def _series(cls, y) -> np.ndarray:
        values = np.asarray(y, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise InputError("Series contains non-finite values")
        return values

    @classmethod
    def select_windows(cls, y, cfg: EstimatorConfig, n: Optional[int] = None) -> WindowSelection:
        """
        Compute u_hat and the windows in u_hat A.

        Args:
            y: Observed series
            cfg: Estimator configuration
            n: Number of windows (default: as many as the series allows)

        Returns:
            WindowSelection with the target window of every conditioning window
        """
        values = cls._series(y)
        h = cfg.h
        if n is None:
            n = cfg.max_windows(values.size)
        if n < 2 or values.size < cfg.required_length(n):
            raise ConfigError(
                f"Series of length {values.size} is too short for n={n} windows "
                f"(needs {cfg.required_length(max(n, 2))})",
                length=int(values.size),
            )

        if cfg.thinned:
            starts = np.arange(n) * h
            k = cfg.resolve_k(n)
            # Same exceedance level k/n over the n*h observations the blocks cover
            u_hat = cls.order_statistic_threshold(values[:n * h], k * h)
        else:
            starts = np.arange(n)
            k = cfg.resolve_k(n)
            u_hat = cls.order_statistic_threshold(values[:n], k)
        if not u_hat > 0:
            raise ConfigError(f"Threshold u_hat={u_hat:.4g} is not positive; reduce k", k=int(k), n=int(n))

        windows = sliding_window_view(values, h)[starts]
        selected = np.asarray(cfg.set.member(u_hat, windows), dtype=bool)
        targets = sliding_window_view(values, cfg.h_prime + 1)[starts + cfg.m]
        return WindowSelection(u_hat, k, n, starts, selected, targets)

    @classmethod
    def _empirical_sigma2(cls, extreme_set: ExtremeSet, selection: WindowSelection,
                          in_b: np.ndarray, value: float, thinned: bool) -> float:
        """
        rho (1 - rho), plus for overlapping sum windows the empirical lag
        cross terms 2 sum_j W_j W_{j+l} / D, l = 1..h-1, W_j = 1{A_j}(1{B_j} - rho).
        """
        sigma2 = value * (1.0 - value)
        if thinned or extreme_set.family is not SetFamily.SUM or extreme_set.dim < 2:
            return sigma2
        w = selection.selected * (in_b.astype(float) - value)
        denominator = selection.denominator
        for lag in range(1, extreme_set.dim):
            sigma2 += 2.0 * float(np.dot(w[:-lag], w[lag:])) / denominator
        return max(sigma2, 0.0)

    @classmethod
    def _estimate(cls, cfg: EstimatorConfig, selection: WindowSelection, in_b: np.ndarray,
                  variance: Optional[VarianceReport] = None) -> Estimate:
        denominator = selection.denominator
        if denominator == 0:
            raise InsufficientExceedancesError(
                f"No window exceeds u_hat={selection.u_hat:.4g} (k={selection.k}, n={selection.n})",
                numerator=0, denominator=0,
            )
        numerator = int(np.sum(selection.selected & in_b))
        value = numerator / denominator

        if variance is not None and not cfg.thinned:
            sigma2 = variance.at(value)
            norming = variance.norming(selection.n, selection.k)
        else:
            sigma2 = cls._empirical_sigma2(cfg.set, selection, in_b, value, cfg.thinned)
            if cfg.mu_c is not None:
                norming = math.sqrt(selection.n * cfg.set.g_scale(selection.k / selection.n) * cfg.mu_c)
            else:
                norming = math.sqrt(denominator)
        stderr = math.sqrt(sigma2) / norming
        ci = (max(0.0, value - Z_95 * stderr), min(1.0, value + Z_95 * stderr))
        return Estimate(
            value=value,
            k_used=selection.k,
            u_hat=selection.u_hat,
            numerator=numerator,
            denominator=denominator,
            stderr=stderr,
            ci95=ci,
            sigma2=sigma2,
            n_windows=selection.n,
        )

    @classmethod
    def rho_hat(cls, y, cfg: EstimatorConfig, box: IntervalBox, n: Optional[int] = None,
                variance: Optional[VarianceReport] = None) -> Estimate:
        """
        Estimate rho(A, B, m) for an interval box B.

        Args:
            y: Observed series of length >= n + m + h'
            cfg: Estimator configuration
            box: Target box, dimension h' + 1
            n: Number of windows (default: all available)
            variance: Model variance report for the norming (simulation studies)

        Returns:
            Estimate

        Raises:
            InsufficientExceedancesError: when no window is selected
        """
        if box.dim != cfg.h_prime + 1:
            raise ConfigError(f"Box dimension {box.dim} does not match h'+1={cfg.h_prime + 1}")
        selection = cls.select_windows(y, cfg, n)
        in_b = box.contains(selection.targets)
        estimate = cls._estimate(cfg, selection, in_b, variance)
        logger.debug(f"rho_hat={estimate.value:.4f} ({estimate.numerator}/{estimate.denominator}, u_hat={estimate.u_hat:.4g})")
        return estimate

    @classmethod
    def rho_tilde(cls, y, cfg: EstimatorConfig, box: IntervalBox, n: Optional[int] = None) -> Estimate:
        """rho_hat over disjoint blocks of h; its variance is always rho (1 - rho)."""
        if not cfg.thinned:
            cfg = EstimatorConfig(cfg.set, cfg.m, cfg.h_prime, cfg.k, cfg.k_exponent, True, cfg.mu_c)
        return cls.rho_hat(y, cfg, box, n)

    @classmethod
    def _curve(cls, cfg: EstimatorConfig, selection: WindowSelection, statistic: np.ndarray,
               y_grid: Sequence[float], variance: Optional[VarianceReport]) -> EstimateCurve:
        grid = grid_tuple(y_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("y_grid must be strictly increasing")
        estimates = tuple(cls._estimate(cfg, selection, statistic <= level, variance) for level in grid)
        return EstimateCurve(grid, estimates)

    @classmethod
    def psi_hat_curve(cls, y, cfg: EstimatorConfig, y_grid: Sequence[float], n: Optional[int] = None,
                      variance: Optional[VarianceReport] = None) -> EstimateCurve:
        """
        Psi_hat(y) = P_hat(Y_{j+m} <= y, ..., Y_{j+m+h'} <= y | window in u_hat A)
        on a grid, sharing one exceedance pass. Nondecreasing in y.
        """
        selection = cls.select_windows(y, cfg, n)
        return cls._curve(cfg, selection, selection.targets.max(axis=1), y_grid, variance)

    @classmethod
    def sum_cdf_curve(cls, y, cfg: EstimatorConfig, y_grid: Sequence[float],
                      n: Optional[int] = None) -> EstimateCurve:
        """P_hat(Y_{j+m} + ... + Y_{j+m+h'} <= y | window in u_hat A) on a grid."""
        selection = cls.select_windows(y, cfg, n)
        return cls._curve(cfg, selection, selection.targets.sum(axis=1), y_grid, None)

    @classmethod
    def psi_star_hat(cls, y, k: int, m: int, h_prime: int, y_grid: Sequence[float],
                     n: Optional[int] = None) -> EstimateCurve:
        """Law of the sum of the next h' + 1 values after a single large observation."""
        cfg = EstimatorConfig(ExtremeSet.box(1), m=m, h_prime=h_prime, k=k)
        return cls.sum_cdf_curve(y, cfg, y_grid, n)

    @classmethod
    def lambda_hat(cls, y, k: int, m: int, y_grid: Sequence[float], n: Optional[int] = None,
                   variance: Optional[VarianceReport] = None) -> EstimateCurve:
        """P_hat(Y_{j+m} <= y | Y_j + Y_{j+1} > u_hat) on a grid."""
        cfg = EstimatorConfig(ExtremeSet.sum_half_space(2), m=m, h_prime=0, k=k)
        return cls.psi_hat_curve(y, cfg, y_grid, n, variance)

    @classmethod
    def empirical_cdf(cls, y, y_grid: Sequence[float]) -> np.ndarray:
        """F_hat(y): fraction of all observations <= y."""
        values = np.sort(cls._series(y))
        counts = np.searchsorted(values, np.asarray(y_grid, dtype=float), side='right')
        return counts / values.size
