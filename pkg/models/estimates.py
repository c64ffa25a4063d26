"""
Query, configuration and result types shared by the limit and estimator
services.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.cones import ExtremeSet
from models.errors import ConfigError, ShapeError
from models.volatility import SvConfig


@dataclass(frozen=True)
class IntervalBox:
    """Product of half-open intervals (lower_i, upper_i] for a target window."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ShapeError("Interval bounds must be nonempty and of equal length")
        if any(lo > up for lo, up in zip(lower, upper)):
            raise ConfigError(f"Empty interval in box {lower} / {upper}")
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @classmethod
    def full(cls, dim: int) -> 'IntervalBox':
        return cls((-math.inf,) * dim, (math.inf,) * dim)

    @classmethod
    def cdf(cls, y) -> 'IntervalBox':
        """(-inf, y_1] x ... x (-inf, y_d]."""
        y = tuple(np.atleast_1d(np.asarray(y, dtype=float)).tolist())
        return cls((-math.inf,) * len(y), y)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def is_full(self) -> bool:
        return all(math.isinf(lo) and lo < 0 for lo in self.lower) and \
            all(math.isinf(up) and up > 0 for up in self.upper)

    def scaled(self, c: float) -> 'IntervalBox':
        if not c > 0:
            raise ConfigError("Scale factor must be positive")
        return IntervalBox(tuple(c * v for v in self.lower), tuple(c * v for v in self.upper))

    def contains(self, values: np.ndarray) -> np.ndarray:
        """Vectorized membership over the last axis."""
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.dim:
            raise ShapeError(f"Box of dimension {self.dim} got vectors of length {values.shape[-1]}")
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        return np.all((values > lower) & (values <= upper), axis=-1)


class TargetKind(Enum):
    """What the limit / estimator evaluates on the target window."""
    CDF_CURVE = 'cdf'
    EVENT = 'event'
    SUM_CDF = 'sum_cdf'


@dataclass(frozen=True)
class LimitQuery:
    """
    A theoretical limit functional to evaluate by Monte Carlo.

    ``y_grid`` holds scalar levels (applied to every target coordinate for
    CDF_CURVE, to the sum for SUM_CDF); ``box`` is used for EVENT.
    """
    cfg: SvConfig
    set: ExtremeSet
    target: TargetKind = TargetKind.CDF_CURVE
    y_grid: Tuple[float, ...] = ()
    box: Optional[IntervalBox] = None
    n_mc: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.target, str):
            object.__setattr__(self, 'target', TargetKind(self.target))
        if self.set.dim != self.cfg.h:
            raise ShapeError(f"Set dimension {self.set.dim} does not match h={self.cfg.h}")
        grid = tuple(float(v) for v in self.y_grid)
        object.__setattr__(self, 'y_grid', grid)
        if self.target in (TargetKind.CDF_CURVE, TargetKind.SUM_CDF):
            if not grid:
                raise ConfigError("Curve targets need a nonempty y_grid")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("y_grid must be strictly increasing")
        if self.target is TargetKind.EVENT:
            if self.box is None:
                raise ConfigError("Event targets need an interval box")
            if self.box.dim != self.cfg.h_prime + 1:
                raise ShapeError(f"Box dimension {self.box.dim} does not match h'+1={self.cfg.h_prime + 1}")
        if self.n_mc < 2:
            raise ConfigError("n_mc must be at least 2")

    @property
    def target_dim(self) -> int:
        return self.cfg.h_prime + 1

    def latent_indices(self, extra_shift: int = 0) -> List[int]:
        """
        Time indices of the conditioning window {1..h} and the target window
        {m..m+h'+extra_shift}, 1-based.
        """
        cfg = self.cfg
        window = list(range(1, cfg.h + 1))
        target = list(range(cfg.m, cfg.m + cfg.h_prime + 1 + extra_shift))
        return window + target

    def with_box(self, box: IntervalBox) -> 'LimitQuery':
        return LimitQuery(self.cfg, self.set, TargetKind.EVENT, (), box, self.n_mc, self.seed)


@dataclass(frozen=True)
class MonteCarloValue:
    """Monte Carlo point value with its standard error."""
    value: float
    stderr: float = 0.0
    n_draws: int = 0

    def __float__(self) -> float:
        return float(self.value)

    def within(self, target: float, n_stderr: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= n_stderr * self.stderr + floor


@dataclass(frozen=True)
class LimitCurve:
    """Theoretical curve y -> Psi(y) with Monte Carlo standard errors."""
    y_grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    raw_values: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'y': self.y_grid, 'psi': self.values, 'stderr': self.stderr})


@dataclass
class VarianceReport:
    """
    Limiting variance of sqrt(n g_C(k/n) mu_C) (rho_hat - rho).

    ``cross_terms`` holds (R(A,B), R(A,B,R), R(A,R)) per lag; ``at`` re-plugs
    another rho into the same cross terms.
    """
    rho: float
    sigma2: float
    mu_c: float
    beta: int
    cross_terms: List[Tuple[float, float, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.sigma2 < 0:
            # Monte Carlo noise around an exact zero
            self.sigma2 = 0.0

    def at(self, rho: float) -> float:
        total = rho * (1.0 - rho)
        for r_ab, r_abr, r_ar in self.cross_terms:
            total += r_ab - 2.0 * rho * r_abr + rho * rho * r_ar
        return max(total, 0.0)

    def norming(self, n: int, k: int) -> float:
        """sqrt(n * g_C(k/n) * mu_C)."""
        return math.sqrt(n * (k / n) ** self.beta * self.mu_c)


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Empirical estimator settings.

    Exactly one of ``k`` (fixed count) or ``k_exponent`` (k = ceil(n^c)) is
    used; ``mu_c`` is the model plug-in for the norming when known.
    """
    set: ExtremeSet
    m: int
    h_prime: int = 0
    k: Optional[int] = None
    k_exponent: Optional[float] = None
    thinned: bool = False
    mu_c: Optional[float] = None

    def __post_init__(self):
        if self.k is None and self.k_exponent is None:
            raise ConfigError("Estimator needs k or k_exponent")
        if self.k is not None and self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.k_exponent is not None and not 0.0 < self.k_exponent < 1.0:
            raise ConfigError(f"k_exponent must lie in (0, 1), got {self.k_exponent}")
        if not self.m >= self.set.dim:
            raise ConfigError(f"Lead m must be at least h (m={self.m}, h={self.set.dim})")
        if self.h_prime < 0:
            raise ConfigError("h' must be >= 0")

    @property
    def h(self) -> int:
        return self.set.dim

    def resolve_k(self, n: int) -> int:
        k = self.k if self.k is not None else int(math.ceil(n ** self.k_exponent))
        if not 1 <= k < n:
            raise ConfigError(f"k must satisfy 1 <= k < n (k={k}, n={n})", k=int(k), n=int(n))
        return k

    @property
    def limit_lead(self) -> int:
        """
        Lead of the matching limit functional. Window j conditions on
        Y_j..Y_{j+h-1} and targets Y_{j+m}; with the window placed at 1..h the
        target sits at index m + 1.
        """
        return self.m + 1

    def required_length(self, n: int) -> int:
        """Observations needed for n windows: the target of the last window ends there."""
        if self.thinned:
            return (n - 1) * self.h + self.m + self.h_prime + 1
        return n + self.m + self.h_prime

    def max_windows(self, length: int) -> int:
        """Largest n with required_length(n) <= length."""
        if self.thinned:
            return (length - self.m - self.h_prime - 1) // self.h + 1
        return length - self.m - self.h_prime


@dataclass(frozen=True)
class Estimate:
    """One empirical ratio estimate with theory-based uncertainty."""
    value: float
    k_used: int
    u_hat: float
    numerator: int
    denominator: int
    stderr: float
    ci95: Tuple[float, float]
    sigma2: float
    n_windows: int

    def as_row(self) -> dict:
        return {
            'value': self.value,
            'stderr': self.stderr,
            'ci_lo': self.ci95[0],
            'ci_hi': self.ci95[1],
            'k': self.k_used,
            'u_hat': self.u_hat,
            'numerator': self.numerator,
            'exceedances': self.denominator,
        }


@dataclass(frozen=True)
class EstimateCurve:
    """Estimates over a y grid sharing one exceedance pass."""
    y_grid: Tuple[float, ...]
    estimates: Tuple[Estimate, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for y, est in zip(self.y_grid, self.estimates):
            rows.append({
                'y': y,
                'psi_hat': est.value,
                'stderr': est.stderr,
                'ci_lo': est.ci95[0],
                'ci_hi': est.ci95[1],
                'k': est.k_used,
                'exceedances': est.denominator,
            })
        return pd.DataFrame(rows, columns=['y', 'psi_hat', 'stderr', 'ci_lo', 'ci_hi', 'k', 'exceedances'])


def grid_tuple(values: Sequence[float]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)
