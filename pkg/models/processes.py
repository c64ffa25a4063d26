"""
Latent Gaussian process models.

AcfModel describes the autocovariance of a stationary, centered,
unit-variance Gaussian sequence; GaussianPath holds one realization.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from models.errors import AcfRangeError, ConfigError


class AcfFamily(Enum):
    """Supported autocovariance families."""
    AR1 = 'ar1'
    FGN = 'fgn'
    WHITE_NOISE = 'white_noise'
    CUSTOM = 'custom'


@dataclass(frozen=True)
class AcfModel:
    """
    Autocovariance of the latent Gaussian driver.

    AR1 uses phi (|phi| < 1), FGN uses the Hurst index (H = 1/2 is white
    noise, H in (1/2, 1) long memory), CUSTOM stores gamma_0..gamma_L and is
    zero beyond L.
    """
    family: AcfFamily
    phi: Optional[float] = None
    hurst: Optional[float] = None
    gammas: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        """Allow string initialization and validate parameters."""
        if isinstance(self.family, str):
            object.__setattr__(self, 'family', AcfFamily(self.family.lower()))
        if self.family is AcfFamily.AR1:
            if self.phi is None or not -1.0 < self.phi < 1.0:
                raise ConfigError(f"AR1 requires |phi| < 1, got {self.phi}")
        elif self.family is AcfFamily.FGN:
            if self.hurst is None or not 0.5 <= self.hurst < 1.0:
                raise ConfigError(f"FGN requires H in [0.5, 1), got {self.hurst}")
        elif self.family is AcfFamily.CUSTOM:
            gammas = tuple(float(g) for g in self.gammas)
            if not gammas:
                raise ConfigError("Custom ACF needs at least gamma_0")
            if abs(gammas[0] - 1.0) > 1e-12:
                raise ConfigError(f"Custom ACF must have gamma_0 = 1, got {gammas[0]}")
            object.__setattr__(self, 'gammas', gammas)

    @classmethod
    def ar1(cls, phi: float) -> 'AcfModel':
        return cls(AcfFamily.AR1, phi=phi)

    @classmethod
    def fgn(cls, hurst: float) -> 'AcfModel':
        return cls(AcfFamily.FGN, hurst=hurst)

    @classmethod
    def white_noise(cls) -> 'AcfModel':
        return cls(AcfFamily.WHITE_NOISE)

    @classmethod
    def custom(cls, gammas) -> 'AcfModel':
        return cls(AcfFamily.CUSTOM, gammas=tuple(gammas))

    @property
    def max_lag(self) -> Optional[int]:
        """Largest stored lag for CUSTOM, None for parametric families."""
        if self.family is AcfFamily.CUSTOM:
            return len(self.gammas) - 1
        return None

    @property
    def is_long_memory(self) -> bool:
        return self.family is AcfFamily.FGN and self.hurst > 0.5

    def covariances(self, lags) -> np.ndarray:
        """
        Vectorized gamma_|lag|; CUSTOM is zero past max_lag.

        Args:
            lags: Integer array of lags (sign ignored)

        Returns:
            Float array of the same shape
        """
        lags = np.abs(np.asarray(lags, dtype=np.int64))
        if self.family is AcfFamily.WHITE_NOISE:
            return (lags == 0).astype(float)
        if self.family is AcfFamily.AR1:
            return np.power(float(self.phi), lags.astype(float))
        if self.family is AcfFamily.FGN:
            two_h = 2.0 * self.hurst
            n = lags.astype(float)
            return 0.5 * (np.abs(n + 1.0) ** two_h - 2.0 * n ** two_h + np.abs(n - 1.0) ** two_h)
        # CUSTOM
        table = np.asarray(self.gammas, dtype=float)
        out = np.zeros(lags.shape, dtype=float)
        inside = lags <= self.max_lag
        out[inside] = table[lags[inside]]
        return out

    def acf(self, lag: int) -> float:
        """Single-lag covariance; CUSTOM raises past its stored range."""
        if lag < 0:
            raise ConfigError(f"Lag must be nonnegative, got {lag}")
        if self.family is AcfFamily.CUSTOM and lag > self.max_lag:
            raise AcfRangeError(f"Lag {lag} beyond stored range {self.max_lag}", lag=int(lag))
        return float(self.covariances(np.array([lag]))[0])

    def describe(self) -> str:
        if self.family is AcfFamily.AR1:
            return f"AR1(phi={self.phi})"
        if self.family is AcfFamily.FGN:
            return f"FGN(H={self.hurst})"
        if self.family is AcfFamily.CUSTOM:
            return f"Custom(max_lag={self.max_lag})"
        return "WhiteNoise"


@dataclass(frozen=True, eq=False)
class GaussianPath:
    """One realization X_1..X_n of the latent process."""
    values: np.ndarray
    seed: int
    acf: AcfModel

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ConfigError("GaussianPath needs a nonempty 1-D array")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return int(self.values.size)
