"""
Heavy-tailed innovation laws.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from models.errors import ConfigError


class TailFamily(Enum):
    """Innovation families with regularly varying right tails."""
    PARETO = 'pareto'
    STUDENT_T = 'student_t'
    CUSTOM = 'custom'


@dataclass(frozen=True)
class TailModel:
    """
    Law of the innovations Z_j.

    PARETO has survival z^-alpha on [1, inf); STUDENT_T has alpha degrees
    of freedom; CUSTOM carries its own survival / upper-quantile functions.
    For CUSTOM, ``upper_quantile(q)`` must invert the survival function
    (return z with P(Z > z) = q) and ``eta_constant`` bounds the second-order
    deviation as eta_constant * min(1, t^-2) if known.
    """
    family: TailFamily
    alpha: float
    survival_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    upper_quantile_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eta_constant: Optional[float] = None
    label: str = ''

    def __post_init__(self):
        """Allow string initialization and validate parameters."""
        if isinstance(self.family, str):
            object.__setattr__(self, 'family', TailFamily(self.family.lower()))
        if not self.alpha > 0:
            raise ConfigError(f"Tail index alpha must be positive, got {self.alpha}")
        if self.family is TailFamily.CUSTOM:
            if self.survival_fn is None or self.upper_quantile_fn is None:
                raise ConfigError("Custom tail needs survival_fn and upper_quantile_fn")

    @classmethod
    def pareto(cls, alpha: float) -> 'TailModel':
        return cls(TailFamily.PARETO, float(alpha))

    @classmethod
    def student_t(cls, alpha: float) -> 'TailModel':
        return cls(TailFamily.STUDENT_T, float(alpha))

    @property
    def nonnegative(self) -> bool:
        """Whether the support lies in [0, inf)."""
        return self.family is TailFamily.PARETO

    @property
    def lower_support(self) -> float:
        return 1.0 if self.family is TailFamily.PARETO else -np.inf

    def describe(self) -> str:
        if self.family is TailFamily.PARETO:
            return f"Pareto({self.alpha:g})"
        if self.family is TailFamily.STUDENT_T:
            return f"StudentT({self.alpha:g})"
        return self.label or f"Custom({self.alpha:g})"
