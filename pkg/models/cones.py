"""
Cones C_j and the extreme set families living in them.

A cone index j is a 0/1 vector of length h. Coordinates flagged 1 must all
be large; among the coordinates flagged 0 at least one must be large. The
limit measure of an ExtremeSet scales like F(t)^beta with beta = |j| + 1.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from models.errors import ConfigError, ShapeError


@dataclass(frozen=True)
class ConeIndex:
    """0/1 bit-vector j selecting the cone C_j."""
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ConfigError("Cone index must have length h >= 1")
        if any(b not in (0, 1) for b in bits):
            raise ConfigError(f"Cone index entries must be 0 or 1, got {bits}")
        object.__setattr__(self, 'bits', bits)

    @property
    def h(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        """|j|, the number of ones."""
        return sum(self.bits)

    @property
    def beta(self) -> int:
        return self.weight + 1

    @property
    def zero_positions(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b == 0)

    @property
    def one_positions(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b == 1)


class SetFamily(Enum):
    """Closed-form set families."""
    BOX = 'box'
    SUM = 'sum'
    COMBINED = 'combined'


@dataclass(frozen=True)
class ExtremeSet:
    """
    A set A in a cone, used dilated as tA.

    BOX: all z_i > 1 (cone (0,1,...,1)). SUM: z_1 + ... + z_h > 1 (cone 0...0).
    COMBINED: z_1 + z_2 > 1 and z_3 > 1 (cone (0,0,1), h = 3).
    """
    family: SetFamily
    dim: int

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, 'family', SetFamily(self.family.lower()))
        if self.dim < 1:
            raise ConfigError(f"Set dimension must be >= 1, got {self.dim}")
        if self.family is SetFamily.COMBINED and self.dim != 3:
            raise ConfigError(f"Combined set is defined for h = 3, got {self.dim}")

    @classmethod
    def box(cls, h: int) -> 'ExtremeSet':
        return cls(SetFamily.BOX, h)

    @classmethod
    def sum_half_space(cls, h: int) -> 'ExtremeSet':
        return cls(SetFamily.SUM, h)

    @classmethod
    def combined(cls) -> 'ExtremeSet':
        return cls(SetFamily.COMBINED, 3)

    @classmethod
    def parse(cls, text: str) -> 'ExtremeSet':
        """Parse 'box:h', 'sum:h' or 'combined'."""
        cleaned = str(text).strip().lower()
        if cleaned == 'combined':
            return cls.combined()
        name, sep, dim = cleaned.partition(':')
        if not sep or name not in ('box', 'sum'):
            raise ConfigError(f"Unknown set spec '{text}' (expected box:h, sum:h or combined)")
        try:
            h = int(dim)
        except ValueError:
            raise ConfigError(f"Invalid set dimension in '{text}'")
        return cls(SetFamily(name), h)

    def to_spec(self) -> str:
        if self.family is SetFamily.COMBINED:
            return 'combined'
        return f"{self.family.value}:{self.dim}"

    @property
    def cone(self) -> ConeIndex:
        if self.family is SetFamily.BOX:
            return ConeIndex((0,) + (1,) * (self.dim - 1))
        if self.family is SetFamily.SUM:
            return ConeIndex((0,) * self.dim)
        return ConeIndex((0, 0, 1))

    @property
    def beta(self) -> int:
        return self.cone.beta

    def _check_last_axis(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise ShapeError(f"{self.to_spec()} expects vectors of length {self.dim}, got shape {arr.shape}")
        return arr

    def member(self, t, y) -> np.ndarray:
        """
        Whether y lies in tA, strict inequalities.

        Args:
            t: Positive scale (scalar or broadcastable to y[..., 0])
            y: Array with last axis of length dim

        Returns:
            Boolean array over the leading axes (a bool for a single vector)
        """
        y = self._check_last_axis(y)
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ConfigError("Scale t must be positive")
        if self.family is SetFamily.BOX:
            inside = np.all(y > t[..., None], axis=-1)
        elif self.family is SetFamily.SUM:
            inside = y.sum(axis=-1) > t
        else:
            inside = (y[..., 0] + y[..., 1] > t) & (y[..., 2] > t)
        return inside if inside.ndim else bool(inside)

    def nu(self, alpha: float, u) -> np.ndarray:
        """nu_C(u^-1 A) in closed form, vectorized over leading axes."""
        u = self._check_last_axis(u)
        if np.any(u <= 0):
            raise ConfigError("Scaling vector u must be positive")
        powered = u ** alpha
        if self.family is SetFamily.BOX:
            return np.prod(powered, axis=-1)
        if self.family is SetFamily.SUM:
            return np.sum(powered, axis=-1)
        return (powered[..., 0] + powered[..., 1]) * powered[..., 2]

    def g_scale(self, t):
        """g_C(t) = t^beta."""
        return np.asarray(t, dtype=float) ** self.beta if np.ndim(t) else float(t) ** self.beta

    def homogeneity(self, alpha: float, s):
        """T_C(s) = s^(-alpha * beta)."""
        return np.asarray(s, dtype=float) ** (-alpha * self.beta) if np.ndim(s) else float(s) ** (-alpha * self.beta)

    def last_coordinate_rule(self, t, u, z_head: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Reduce membership of u * z in tA to a threshold on the last coordinate.

        Given the first dim - 1 coordinates, u * z lies in tA iff ``gate``
        holds and z_last > ``threshold``.

        Args:
            t: Positive scale
            u: Positive scaling vector of length dim
            z_head: Array (..., dim - 1) of the leading coordinates

        Returns:
            Tuple of (gate boolean array, threshold array)
        """
        u = self._check_last_axis(u)
        z_head = np.asarray(z_head, dtype=float)
        lead_shape = z_head.shape[:-1]
        scaled = z_head * u[:-1]
        if self.family is SetFamily.BOX:
            gate = np.all(scaled > t, axis=-1)
            threshold = np.full(lead_shape, t / u[-1])
        elif self.family is SetFamily.SUM:
            gate = np.ones(lead_shape, dtype=bool)
            threshold = (t - scaled.sum(axis=-1)) / u[-1]
        else:
            gate = scaled[..., 0] + scaled[..., 1] > t
            threshold = np.full(lead_shape, t / u[-1])
        return gate, threshold

    def bound_envelope(self, alpha: float, eps: float, u) -> np.ndarray:
        """
        Shape of the M_A bound: sum over zero flags of (u_i v 1)^(a+e)
        times the product over one flags of (u_i v 1)^(a+e).
        """
        u = self._check_last_axis(u)
        powered = np.maximum(u, 1.0) ** (alpha + eps)
        cone = self.cone
        zeros = list(cone.zero_positions)
        ones = list(cone.one_positions)
        zero_part = powered[..., zeros].sum(axis=-1) if zeros else np.ones(powered.shape[:-1])
        one_part = powered[..., ones].prod(axis=-1) if ones else np.ones(powered.shape[:-1])
        return zero_part * one_part
