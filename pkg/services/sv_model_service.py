"""
SV Model Service.

Builds Y_j = sigma(X_j) Z_j from a latent Gaussian path and i.i.d.
innovations, computes the volatility moments E[sigma^(order*alpha)(X)], and
provides empirical extremal-dependence diagnostics on simulated series.
"""
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from models.errors import ConfigError
from models.volatility import SvConfig, VolatilityFamily, VolatilityFn
from services.gaussian_simulation_service import GaussianSimulationService
from services.tail_service import TailService
from utils.logger import get_logger
from utils.quadrature import expect_1d
from utils.seeding import INNOVATION_STREAM, LATENT_STREAM, derive_seed, make_rng

logger = get_logger(__name__)


@dataclass(frozen=True)
class SvSample:
    """Simulated (Y, X, Z) triple; Y = sigma(X) * Z elementwise."""
    y: np.ndarray
    x: np.ndarray
    z: np.ndarray
    seed: int

    def __len__(self) -> int:
        return int(self.y.size)


class SvModelService:
    """
    Stochastic volatility simulation and moments.
    """

    GH_NODES = 64

    @classmethod
    def simulate_sv(cls, cfg: SvConfig, seed: int) -> SvSample:
        """
        Simulate Y_1..Y_n.

        X and Z use separate seed streams derived from ``seed`` so they are
        independent and each is reproducible on its own.

        Args:
            cfg: Process configuration
            seed: Master seed for this draw

        Returns:
            SvSample with the latent path and innovations
        """
        x_path = GaussianSimulationService.simulate_path(cfg.acf, cfg.n, derive_seed(seed, LATENT_STREAM))
        z = TailService.sample(cfg.tail, cfg.n, rng=make_rng(seed, INNOVATION_STREAM))
        x = np.array(x_path.values)
        y = cfg.vol(x) * z
        return SvSample(y=y, x=x, z=z, seed=int(seed))

    @classmethod
    def sigma_alpha_moment(cls, vol: VolatilityFn, alpha: float, order: int = 1) -> float:
        """
        E[sigma^(order * alpha)(X)] for X standard normal.

        Closed form for Exp and Const, Gauss-Hermite quadrature otherwise.
        A divergent value is returned as math.inf and logged.

        Args:
            vol: Volatility function
            alpha: Tail index
            order: 1 or 2

        Returns:
            Moment value or math.inf
        """
        if order not in (1, 2):
            raise ConfigError(f"Moment order must be 1 or 2, got {order}")
        k = order * alpha
        if vol.family is VolatilityFamily.EXP:
            log_value = k * math.log(vol.scale) + 0.5 * k * k
            value = math.exp(log_value) if log_value < 700 else math.inf
        elif vol.family is VolatilityFamily.CONST:
            value = vol.scale ** k
        else:
            value = expect_1d(lambda x: vol(x) ** k, cls.GH_NODES)

        if not math.isfinite(value):
            logger.warning(f"E[sigma^{k:g}] diverges for {vol.describe()}")
            return math.inf
        return float(value)

    @classmethod
    def joint_exceedance_profile(cls, y: np.ndarray, lag: int, levels: Sequence[float]) -> Dict[str, np.ndarray]:
        """
        Empirical extremal-dependence statistics at return levels t:
        a(t) is the empirical (1 - 1/t) quantile of Y.

        Returns:
            Dict with 'level', 'threshold', 't_joint' = t P(Y_0 > a(t), Y_lag > a(t))
            and 'dependence_ratio' = P(joint) / P(Y_0 > a(t))^2
        """
        y = np.asarray(y, dtype=float)
        if lag < 1 or lag >= y.size:
            raise ConfigError(f"Lag must lie in [1, n), got {lag}")
        head, tail = y[:-lag], y[lag:]
        levels = np.asarray(levels, dtype=float)
        thresholds = np.quantile(y, 1.0 - 1.0 / levels)
        joint = np.array([np.mean((head > a) & (tail > a)) for a in thresholds])
        marginal = np.array([np.mean(y > a) for a in thresholds])
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(marginal > 0, joint / marginal ** 2, np.nan)
        return {
            'level': levels,
            'threshold': thresholds,
            't_joint': levels * joint,
            'dependence_ratio': ratio,
        }

    @classmethod
    def tail_dependence_ratio(cls, y: np.ndarray, lag: int, quantile: float) -> float:
        """P(Y_0 > t, Y_lag > t) / P(Y_0 > t)^2 at the empirical quantile t."""
        y = np.asarray(y, dtype=float)
        t = float(np.quantile(y, quantile))
        joint = np.mean((y[:-lag] > t) & (y[lag:] > t))
        marginal = np.mean(y > t)
        return float(joint / marginal ** 2) if marginal > 0 else math.nan

    @classmethod
    def overlap_conditional_probability(cls, y: np.ndarray, quantile: float) -> float:
        """
        P(Y_{j+1} + Y_{j+2} > t | Y_j + Y_{j+1} > t) with t the empirical
        quantile of pair sums; about 1/2 for heavy-tailed i.i.d. data, which is
        why the target window must not overlap the conditioning window.
        """
        y = np.asarray(y, dtype=float)
        pair = y[:-1] + y[1:]
        t = float(np.quantile(pair, quantile))
        first = pair[:-1] > t
        second = pair[1:] > t
        if not first.any():
            return math.nan
        return float(np.mean(second[first]))
