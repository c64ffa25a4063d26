"""
Tail Service.

Survival, quantile and inverse-CDF sampling for the innovation laws, the
second-order envelope eta*, and numerical checks of the convolution tail
expansion P(u1 Z1 + u2 Z2 > t) ~ F(t/u1) + F(t/u2).
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, stats

from models.errors import ConfigError, DomainError, IntegrationError, UnsupportedError
from models.tails import TailFamily, TailModel
from utils.logger import get_logger
from utils.seeding import make_rng

logger = get_logger(__name__)


@dataclass(frozen=True)
class ConvolutionTailReport:
    """Convolution remainder of two weighted innovations against its envelope."""
    t_grid: np.ndarray
    lhs: np.ndarray
    envelope: np.ndarray
    ratios: np.ndarray
    c_hat: float
    decade_ratio: float
    bounded: bool

    def to_rows(self):
        return [
            {'t': float(t), 'lhs': float(l), 'envelope': float(e), 'ratio': float(r)}
            for t, l, e, r in zip(self.t_grid, self.lhs, self.envelope, self.ratios)
        ]


class TailService:
    """
    Innovation-law computations, dispatched on TailModel.family.
    """

    # Grid over which the Student-t eta envelope constant is fitted
    ETA_FIT_GRID = np.logspace(0, 4, 200)
    QUAD_OPTS = {'epsabs': 0.0, 'epsrel': 1e-11, 'limit': 400}
    LOWER_LOG_SPAN = 60.0

    @classmethod
    def survival(cls, model: TailModel, z):
        """P(Z > z), vectorized."""
        z_arr = np.asarray(z, dtype=float)
        if model.family is TailFamily.PARETO:
            with np.errstate(divide='ignore'):
                out = np.where(z_arr < 1.0, 1.0, np.power(np.maximum(z_arr, 1.0), -model.alpha))
        elif model.family is TailFamily.STUDENT_T:
            out = stats.t.sf(z_arr, df=model.alpha)
        else:
            out = np.asarray(model.survival_fn(z_arr), dtype=float)
        return float(out) if np.ndim(z) == 0 else out

    @classmethod
    def cdf(cls, model: TailModel, z):
        """P(Z <= z), evaluated without cancellation on the left tail."""
        z_arr = np.asarray(z, dtype=float)
        if model.family is TailFamily.STUDENT_T:
            out = stats.t.cdf(z_arr, df=model.alpha)
        else:
            out = 1.0 - np.asarray(cls.survival(model, z_arr), dtype=float)
        return float(out) if np.ndim(z) == 0 else out

    @classmethod
    def density(cls, model: TailModel, z):
        z_arr = np.asarray(z, dtype=float)
        if model.family is TailFamily.PARETO:
            a = model.alpha
            out = np.where(z_arr < 1.0, 0.0, a * np.power(np.maximum(z_arr, 1.0), -a - 1.0))
        elif model.family is TailFamily.STUDENT_T:
            out = stats.t.pdf(z_arr, df=model.alpha)
        else:
            raise UnsupportedError("Density is not available for custom tails")
        return float(out) if np.ndim(z) == 0 else out

    @classmethod
    def upper_quantile(cls, model: TailModel, q):
        """z with P(Z > z) = q, q in (0, 1]; accurate for tiny q."""
        q_arr = np.asarray(q, dtype=float)
        if model.family is TailFamily.PARETO:
            out = np.power(q_arr, -1.0 / model.alpha)
        elif model.family is TailFamily.STUDENT_T:
            out = stats.t.isf(q_arr, df=model.alpha)
        else:
            out = np.asarray(model.upper_quantile_fn(q_arr), dtype=float)
        return float(out) if np.ndim(q) == 0 else out

    @classmethod
    def quantile(cls, model: TailModel, p):
        """
        Left-continuous inverse F^<-(p).

        Args:
            model: Tail model
            p: Probability in (0, 1)

        Returns:
            Quantile value
        """
        p_arr = np.asarray(p, dtype=float)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise DomainError(f"Quantile level must lie in (0, 1), got {p}")
        if model.family is TailFamily.STUDENT_T:
            out = stats.t.ppf(p_arr, df=model.alpha)
            return float(out) if np.ndim(p) == 0 else out
        out = cls.upper_quantile(model, 1.0 - p_arr)
        return float(out) if np.ndim(p) == 0 else out

    @classmethod
    def sample(cls, model: TailModel, n: int, seed=None, rng: np.random.Generator = None) -> np.ndarray:
        """
        n i.i.d. draws by inverse-CDF sampling.

        Either ``seed`` or an existing ``rng`` is used.
        """
        if n < 1:
            raise ConfigError(f"Sample size must be >= 1, got {n}")
        if rng is None:
            rng = make_rng(0 if seed is None else seed)
        # Uniform on (0, 1]
        survival_levels = 1.0 - rng.random(n)
        return np.asarray(cls.upper_quantile(model, survival_levels), dtype=float)

    @classmethod
    def sample_conditional(cls, model: TailModel, threshold, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draws from the law of Z given Z > threshold (threshold broadcast to n)."""
        levels = np.asarray(cls.survival(model, np.broadcast_to(threshold, (n,))), dtype=float)
        return np.asarray(cls.upper_quantile(model, levels * (1.0 - rng.random(n))), dtype=float)

    @classmethod
    def eta(cls, model: TailModel, z):
        """
        Second-order function eta(z) = alpha - z f(z) / F(z), so that
        F(z) = c z^-alpha exp(int_1^z eta(s)/s ds).
        """
        if model.family is TailFamily.PARETO:
            return np.zeros_like(np.asarray(z, dtype=float))
        if model.family is TailFamily.STUDENT_T:
            z_arr = np.asarray(z, dtype=float)
            logpdf = stats.t.logpdf(z_arr, df=model.alpha)
            logsf = stats.t.logsf(z_arr, df=model.alpha)
            return model.alpha - z_arr * np.exp(logpdf - logsf)
        raise UnsupportedError("eta is only implemented for Pareto and Student-t tails")

    @classmethod
    def eta_constant(cls, model: TailModel) -> float:
        """Fitted C with |eta(s)| <= C min(1, s^-2) on the fit grid."""
        if model.family is TailFamily.PARETO:
            return 0.0
        if model.family is TailFamily.CUSTOM:
            if model.eta_constant is None:
                raise UnsupportedError("Custom tail has no eta envelope constant")
            return float(model.eta_constant)
        grid = cls.ETA_FIT_GRID
        # Running sup from the right keeps the envelope nonincreasing
        eta_abs = np.abs(cls.eta(model, grid))
        sup_right = np.maximum.accumulate(eta_abs[::-1])[::-1]
        return float(np.max(sup_right * np.maximum(grid, 1.0) ** 2))

    @classmethod
    def eta_star(cls, model: TailModel, t):
        """
        Envelope eta*(t) = C min(1, t^-2): bounded, nonincreasing, regularly
        varying with index -2, zero for exact Pareto tails.
        """
        t_arr = np.asarray(t, dtype=float)
        const = cls.eta_constant(model)
        out = const * np.minimum(1.0, np.power(np.maximum(t_arr, 1e-300), -2.0))
        return float(out) if np.ndim(t) == 0 else out

    @classmethod
    def integrated_tail(cls, model: TailModel, t: float) -> float:
        """int_0^t F(s) ds."""
        if t <= 0:
            return 0.0
        if model.family is TailFamily.PARETO:
            a = model.alpha
            if t <= 1.0:
                return float(t)
            if abs(a - 1.0) < 1e-12:
                return 1.0 + math.log(t)
            return 1.0 + (t ** (1.0 - a) - 1.0) / (1.0 - a)
        value, _ = integrate.quad(lambda s: cls.survival(model, s), 0.0, t, limit=200)
        return float(value)

    @classmethod
    def _check_nonnegative(cls, model: TailModel):
        if model.family is not TailFamily.PARETO:
            raise UnsupportedError("Convolution checks need a nonnegative law (use Pareto)")

    @classmethod
    def _half_integral(cls, model: TailModel, u_small: float, u_big: float, t: float) -> float:
        """
        E[1{u_small Z1 <= t/2} (F((t - u_small Z1)/u_big) - F(t/u_big))].

        Integrated over z in [1, t/(2 u_small)] against the Pareto density;
        the kink where (t - u_small z)/u_big crosses 1 is passed to quad.
        """
        upper = t / (2.0 * u_small)
        if upper <= 1.0:
            return 0.0
        base = cls.survival(model, t / u_big)

        def integrand(z):
            return (cls.survival(model, (t - u_small * z) / u_big) - base) * cls.density(model, z)

        kink = (t - u_big) / u_small
        points = [kink] if 1.0 < kink < upper else None
        value, abserr = integrate.quad(integrand, 1.0, upper, points=points, **cls.QUAD_OPTS)
        if not np.isfinite(value):
            raise IntegrationError(
                f"Convolution integral failed at t={t}", t=float(t), abserr=float(abserr)
            )
        return float(value)

    @classmethod
    def convolution_remainder(cls, model: TailModel, u1: float, u2: float, t: float) -> float:
        """
        Signed P(u1 Z1 + u2 Z2 > t) - F(t/u1) - F(t/u2) for i.i.d. nonnegative Z.

        Decomposes the event by which summand exceeds t/2 so the result is
        computed without subtracting nearly equal probabilities.
        """
        cls._check_nonnegative(model)
        f1 = cls.survival(model, t / u1)
        f2 = cls.survival(model, t / u2)
        mid1 = cls.survival(model, t / (2.0 * u1)) - f1
        mid2 = cls.survival(model, t / (2.0 * u2)) - f2
        return (-f1 * f2 + mid1 * mid2
                + cls._half_integral(model, u1, u2, t)
                + cls._half_integral(model, u2, u1, t))

    @classmethod
    def convolution_tail_check(cls, model: TailModel, u1: float, u2: float,
                               t_grid: Sequence[float], eps: float = 0.1) -> ConvolutionTailReport:
        """
        Compare |P(u1 Z1 + u2 Z2 > t) - F(t/u1) - F(t/u2)| with the envelope
        (u1 v 1)^(a+e) (u2 v 1)^(a+e) t^-1 F(t) int_0^t F(s) ds.

        Args:
            model: Nonnegative tail model (Pareto)
            u1, u2: Positive weights
            t_grid: Increasing positive levels spanning at least a decade
            eps: Exponent slack epsilon

        Returns:
            ConvolutionTailReport with fitted constant and boundedness verdict
        """
        cls._check_nonnegative(model)
        if u1 <= 0 or u2 <= 0:
            raise ConfigError("Weights u1, u2 must be positive")
        t_arr = np.asarray(t_grid, dtype=float)
        if t_arr.ndim != 1 or t_arr.size < 2 or np.any(t_arr <= 0) or np.any(np.diff(t_arr) <= 0):
            raise ConfigError("t_grid must be increasing and positive")

        a = model.alpha
        weight = max(u1, 1.0) ** (a + eps) * max(u2, 1.0) ** (a + eps)
        lhs = np.array([abs(cls.convolution_remainder(model, u1, u2, t)) for t in t_arr])
        envelope = np.array([
            weight * cls.survival(model, t) * cls.integrated_tail(model, t) / t for t in t_arr
        ])
        ratios = lhs / envelope
        c_hat = float(ratios.max())

        first = ratios[t_arr <= 10.0 * t_arr[0]]
        last = ratios[t_arr >= t_arr[-1] / 10.0]
        decade_ratio = float(last.max() / first.max()) if first.max() > 0 else math.inf
        bounded = bool(np.isfinite(c_hat) and decade_ratio <= 2.0)
        logger.debug(f"Convolution check {model.describe()} u=({u1}, {u2}): C_hat={c_hat:.4g}, decade ratio={decade_ratio:.3f}")
        return ConvolutionTailReport(t_arr, lhs, envelope, ratios, c_hat, decade_ratio, bounded)

    @classmethod
    def sum_tail_expansion(cls, model: TailModel, t: float) -> float:
        """t (P(Z1 + Z2 > t) / F(t) - 2) for i.i.d. nonnegative Z."""
        remainder = cls.convolution_remainder(model, 1.0, 1.0, t)
        return t * remainder / cls.survival(model, t)

    @classmethod
    def sum_tail_first_order_limit(cls, model: TailModel, n_terms: int = 2) -> float:
        """
        Limit of t (P(Z1+...+Zn > t)/F(t) - n) for Pareto with alpha > 1:
        n (n - 1) alpha E[Z].
        """
        cls._check_nonnegative(model)
        a = model.alpha
        if a <= 1.0:
            raise ConfigError("The first-order sum expansion needs a finite mean (alpha > 1)")
        mean = a / (a - 1.0)
        return n_terms * (n_terms - 1) * a * mean

    @classmethod
    def weighted_sum_survival(cls, model: TailModel, w1, w2, level, n_nodes: int = 256) -> np.ndarray:
        """
        P(w1 Z1 + w2 Z2 > level), vectorized over broadcast w1, w2, level.

        Uses P = int_0^1 F((level - w1 Q(v)) / w2) dv with Q the upper
        quantile, split at v* = F(level/w1). Each piece is taken by
        Gauss-Legendre in log v; for a nonnegative law the piece below v*
        is exactly v*.
        """
        w1, w2, level = np.broadcast_arrays(
            np.asarray(w1, dtype=float), np.asarray(w2, dtype=float), np.asarray(level, dtype=float)
        )
        v_star = np.clip(np.asarray(cls.survival(model, level / w1), dtype=float), 1e-300, 1.0)
        nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
        log_lo = np.log(v_star)[..., None]

        def inner(v):
            z1 = np.asarray(cls.upper_quantile(model, v), dtype=float)
            return np.asarray(cls.survival(model, (level[..., None] - w1[..., None] * z1) / w2[..., None]), dtype=float)

        # s runs over [log v*, 0]
        s = log_lo * (1.0 - nodes) / 2.0
        v = np.exp(s)
        upper_piece = np.sum(weights * inner(v) * v, axis=-1) * (-log_lo[..., 0] / 2.0)
        if model.nonnegative:
            lower_piece = v_star
        else:
            # v = v* e^s with s over [-LOWER_LOG_SPAN, 0]
            s = -cls.LOWER_LOG_SPAN * (1.0 - nodes) / 2.0
            v = v_star[..., None] * np.exp(s)
            lower_piece = np.sum(weights * inner(v) * v, axis=-1) * (cls.LOWER_LOG_SPAN / 2.0)
        return np.clip(lower_piece + upper_piece, 0.0, 1.0)
