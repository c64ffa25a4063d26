"""
Volatility functions and the full stochastic volatility configuration.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from models.errors import ConfigError
from models.processes import AcfModel
from models.tails import TailModel

ABS_POWER_FLOOR = 1e-8


class VolatilityFamily(Enum):
    """Shapes of sigma(x)."""
    EXP = 'exp'
    ABS_POWER = 'abs_power'
    CONST = 'const'


@dataclass(frozen=True)
class VolatilityFn:
    """
    Positive volatility function sigma.

    EXP: scale * e^x; ABS_POWER: scale * (|x|^power + 1e-8);
    CONST: scale. ``scale`` lets any family be multiplied by c > 0.
    """
    family: VolatilityFamily
    power: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, 'family', VolatilityFamily(self.family.lower()))
        if not self.scale > 0:
            raise ConfigError(f"Volatility scale must be positive, got {self.scale}")
        if self.family is VolatilityFamily.ABS_POWER and not self.power > 0:
            raise ConfigError(f"AbsPower exponent must be positive, got {self.power}")

    @classmethod
    def exp(cls, scale: float = 1.0) -> 'VolatilityFn':
        return cls(VolatilityFamily.EXP, scale=scale)

    @classmethod
    def abs_power(cls, power: float, scale: float = 1.0) -> 'VolatilityFn':
        return cls(VolatilityFamily.ABS_POWER, power=power, scale=scale)

    @classmethod
    def const(cls, c: float = 1.0) -> 'VolatilityFn':
        return cls(VolatilityFamily.CONST, scale=c)

    def scaled(self, c: float) -> 'VolatilityFn':
        """c * sigma."""
        return VolatilityFn(self.family, power=self.power, scale=self.scale * c)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family is VolatilityFamily.EXP:
            return self.scale * np.exp(x)
        if self.family is VolatilityFamily.ABS_POWER:
            return self.scale * (np.abs(x) ** self.power + ABS_POWER_FLOOR)
        return np.full(x.shape, self.scale, dtype=float)

    @property
    def is_constant(self) -> bool:
        return self.family is VolatilityFamily.CONST

    def describe(self) -> str:
        base = {
            VolatilityFamily.EXP: 'Exp',
            VolatilityFamily.ABS_POWER: f'AbsPower({self.power:g})',
            VolatilityFamily.CONST: 'Const',
        }[self.family]
        return base if self.scale == 1.0 else f"{self.scale:g}*{base}"


@dataclass(frozen=True)
class SvConfig:
    """
    Full description of Y_j = sigma(X_j) Z_j.

    ``h`` is the conditioning window, ``m`` the lead (target window starts
    m - 1 steps after the conditioning window starts), ``h_prime`` the extra
    target length and ``n`` the simulated length.
    """
    acf: AcfModel
    vol: VolatilityFn
    tail: TailModel
    n: int
    m: int
    h: int = 1
    h_prime: int = 0

    def __post_init__(self):
        if self.h < 1:
            raise ConfigError(f"Window h must be >= 1, got {self.h}")
        if self.h_prime < 0:
            raise ConfigError(f"Target window h' must be >= 0, got {self.h_prime}")
        if not self.m > self.h:
            raise ConfigError(f"Lead m must exceed h (m={self.m}, h={self.h})")
        if self.n < self.m + self.h_prime + 1:
            raise ConfigError(
                f"Length n={self.n} too short, need n >= m + h' + 1 = {self.m + self.h_prime + 1}"
            )

    @property
    def alpha(self) -> float:
        return self.tail.alpha
