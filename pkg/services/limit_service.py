"""
Limit Service.

Theoretical limit functionals of the conditional extremogram, evaluated by
Monte Carlo over the latent Gaussian vector (and by tensor Gauss-Hermite
quadrature for low dimensions):

- rho(A, B, m) = E[nu(sigma(X_{1..h})^-1 A) P(Y_{m..m+h'} in B | X)] / E[nu(...)]
- Psi(y): the same with B = (-inf, y]^(h'+1), or the law of the target sum
- mu_C(A) = E[nu(...)] / E[sigma^alpha]^beta
- the limiting variance with the lag cross terms of the sum set
- the tail-dependence constant and the bias rate v_n(A)

All expectations inside one call reuse the same latent draws (common
random numbers), so ratios such as rho(A, full space, m) are exactly 1.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from models.cones import ExtremeSet, SetFamily
from models.errors import (
    ConfigError,
    DegenerateSetError,
    NumericError,
    ShapeError,
    UnsupportedError,
)
from models.estimates import (
    IntervalBox,
    LimitCurve,
    LimitQuery,
    MonteCarloValue,
    TargetKind,
    VarianceReport,
)
from models.processes import AcfModel
from models.tails import TailModel
from models.volatility import VolatilityFn
from services.gaussian_simulation_service import GaussianSimulationService
from services.sv_model_service import SvModelService
from services.tail_service import TailService
from utils.logger import get_logger
from utils.quadrature import expect_gaussian
from utils.seeding import make_rng

logger = get_logger(__name__)

# Stream ids under a query seed
LATENT_DRAWS = 0
INNER_INNOVATIONS = 1


@dataclass(frozen=True)
class BiasRateResult:
    """v_n(A) estimate with the threshold u_n it was computed at."""
    value: float
    stderr: float
    u_n: float
    envelope: float

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class SumPairCovariance:
    """Covariance of W(y), W(y') for the two-term sum set, swapped and repeated cross products."""
    symmetric: float
    repeated: float


class LimitService:
    """
    Monte Carlo and quadrature evaluation of limit functionals.
    """

    GH_NODES = 64
    S_GRID = (1.0, 1.25, 1.5, 2.0, 3.0, 5.0)

    # ------------------------------------------------------------------ draws

    @classmethod
    def _latent_draws(cls, acf: AcfModel, indices: Sequence[int], n_mc: int, seed: int) -> np.ndarray:
        rng = make_rng(seed, LATENT_DRAWS)
        return GaussianSimulationService.sample_vectors(acf, indices, n_mc, rng)

    @classmethod
    def _window_weights(cls, query: LimitQuery, sigma_window: np.ndarray) -> np.ndarray:
        """nu(sigma(X_{1..h})^-1 A) per draw."""
        return query.set.nu(query.cfg.alpha, sigma_window)

    @classmethod
    def box_probability(cls, tail: TailModel, sigma_target: np.ndarray, box: IntervalBox) -> np.ndarray:
        """P(sigma_i Z_i in (a_i, b_i] for all i | X)."""
        prob = np.ones(sigma_target.shape[0])
        for i in range(box.dim):
            upper = np.asarray(TailService.cdf(tail, box.upper[i] / sigma_target[:, i]), dtype=float)
            lower = np.asarray(TailService.cdf(tail, box.lower[i] / sigma_target[:, i]), dtype=float)
            prob = prob * (upper - lower)
        return prob

    @classmethod
    def _sum_cdf_probability(cls, tail: TailModel, sigma_target: np.ndarray, level: float,
                             inner_z: Optional[np.ndarray]) -> np.ndarray:
        """
        P(sum_i sigma_i Z_i <= level | X); the leading innovations are one
        inner draw per outer draw, the last one is integrated exactly.
        """
        partial = np.zeros(sigma_target.shape[0])
        if inner_z is not None and inner_z.shape[1]:
            partial = np.sum(sigma_target[:, :-1] * inner_z, axis=1)
        return np.asarray(TailService.cdf(tail, (level - partial) / sigma_target[:, -1]), dtype=float)

    @classmethod
    def overlapping_box_probability(cls, tail: TailModel, sigma_targets: np.ndarray, box: IntervalBox,
                                    lag: int) -> np.ndarray:
        """
        P(target block at 0 in B and target block at lag in B | X).

        The blocks cover coordinates [0, d) and [lag, lag + d); where they
        overlap, a coordinate must lie in both intervals of B.
        """
        d = box.dim
        span = lag + d
        if sigma_targets.shape[1] < span:
            raise ShapeError(f"Need {span} target volatilities, got {sigma_targets.shape[1]}")
        prob = np.ones(sigma_targets.shape[0])
        for i in range(span):
            lower, upper = -math.inf, math.inf
            if i < d:
                lower, upper = box.lower[i], box.upper[i]
            if i >= lag:
                lower = max(lower, box.lower[i - lag])
                upper = min(upper, box.upper[i - lag])
            if upper <= lower:
                return np.zeros(sigma_targets.shape[0])
            hi = np.asarray(TailService.cdf(tail, upper / sigma_targets[:, i]), dtype=float)
            lo = np.asarray(TailService.cdf(tail, lower / sigma_targets[:, i]), dtype=float)
            prob = prob * (hi - lo)
        return prob

    @staticmethod
    def _ratio_with_stderr(numerator: np.ndarray, weights: np.ndarray) -> Tuple[float, float]:
        """Ratio of means with its delta-method standard error."""
        w_mean = float(np.mean(weights))
        if not w_mean > 0:
            raise DegenerateSetError("Monte Carlo denominator is not positive")
        ratio = float(np.sum(numerator) / np.sum(weights))
        n = weights.size
        resid = numerator - ratio * weights
        stderr = float(np.std(resid, ddof=1) / math.sqrt(n) / w_mean) if n > 1 else math.nan
        return ratio, stderr

    # ------------------------------------------------------------- functionals

    @classmethod
    def mc_psi_limit(cls, query: LimitQuery) -> LimitCurve:
        """
        Psi(y) on the query's y grid with Monte Carlo standard errors.

        CDF_CURVE evaluates P(Y_m <= y, ..., Y_{m+h'} <= y | extreme window);
        SUM_CDF evaluates P(Y_m + ... + Y_{m+h'} <= y | extreme window).
        Raw values are kept; ``values`` are isotonic-corrected and clipped to
        [0, 1].

        Args:
            query: LimitQuery with a curve target

        Returns:
            LimitCurve
        """
        if query.target not in (TargetKind.CDF_CURVE, TargetKind.SUM_CDF):
            raise ConfigError(f"mc_psi_limit needs a curve target, got {query.target.value}")
        cfg = query.cfg
        x = cls._latent_draws(cfg.acf, query.latent_indices(), query.n_mc, query.seed)
        sigma = cfg.vol(x)
        weights = cls._window_weights(query, sigma[:, :cfg.h])
        sigma_target = sigma[:, cfg.h:]

        inner_z = None
        if query.target is TargetKind.SUM_CDF and cfg.h_prime > 0:
            rng = make_rng(query.seed, INNER_INNOVATIONS)
            inner_z = TailService.sample(cfg.tail, query.n_mc * cfg.h_prime, rng=rng).reshape(query.n_mc, cfg.h_prime)

        raw = np.empty(len(query.y_grid))
        stderr = np.empty(len(query.y_grid))
        for g, y in enumerate(query.y_grid):
            if query.target is TargetKind.CDF_CURVE:
                prob = cls.box_probability(cfg.tail, sigma_target, IntervalBox.cdf([y] * query.target_dim))
            else:
                prob = cls._sum_cdf_probability(cfg.tail, sigma_target, y, inner_z)
            raw[g], stderr[g] = cls._ratio_with_stderr(weights * prob, weights)

        values = np.clip(optimize.isotonic_regression(raw).x, 0.0, 1.0)
        logger.debug(f"Psi limit on {len(query.y_grid)} grid points, n_mc={query.n_mc}")
        return LimitCurve(np.asarray(query.y_grid), values, stderr, raw)

    @classmethod
    def mc_rho_limit(cls, query: LimitQuery) -> MonteCarloValue:
        """
        rho(A, B, m) for an interval box B.

        Args:
            query: LimitQuery with an EVENT target

        Returns:
            MonteCarloValue (exactly 1 when B is the full space)
        """
        if query.target is not TargetKind.EVENT:
            raise ConfigError("mc_rho_limit needs an EVENT target with an interval box")
        cfg = query.cfg
        x = cls._latent_draws(cfg.acf, query.latent_indices(), query.n_mc, query.seed)
        sigma = cfg.vol(x)
        weights = cls._window_weights(query, sigma[:, :cfg.h])
        prob = cls.box_probability(cfg.tail, sigma[:, cfg.h:], query.box)
        value, stderr = cls._ratio_with_stderr(weights * prob, weights)
        return MonteCarloValue(value, stderr, query.n_mc)

    @classmethod
    def mu_C(cls, extreme_set: ExtremeSet, vol: VolatilityFn, acf: AcfModel, alpha: float,
             n_mc: int, seed: int) -> MonteCarloValue:
        """
        mu_C(A) = E[nu(sigma(X_{1..h})^-1 A)] / E[sigma^alpha(X)]^beta.

        Raises:
            ConfigError: when E[sigma^(2 alpha)] is infinite
        """
        if not math.isfinite(SvModelService.sigma_alpha_moment(vol, alpha, 2)):
            raise ConfigError(f"E[sigma^(2 alpha)] is infinite for {vol.describe()}")
        moment = SvModelService.sigma_alpha_moment(vol, alpha, 1)
        x = cls._latent_draws(acf, range(1, extreme_set.dim + 1), n_mc, seed)
        nu = extreme_set.nu(alpha, vol(x))
        scale = moment ** extreme_set.beta
        stderr = float(np.std(nu, ddof=1) / math.sqrt(n_mc) / scale) if n_mc > 1 else math.nan
        return MonteCarloValue(float(np.mean(nu) / scale), stderr, n_mc)

    @classmethod
    def box_norming_constant(cls, vol: VolatilityFn, acf: AcfModel, alpha: float, h: int,
                             n_mc: int, seed: int) -> float:
        """(E[prod_i sigma^alpha(X_i)] / E[sigma^alpha]^h)^(-1/2) for the h-box."""
        mu = cls.mu_C(ExtremeSet.box(h), vol, acf, alpha, n_mc, seed)
        return 1.0 / math.sqrt(mu.value)

    @classmethod
    def tail_dep_constant(cls, vol: VolatilityFn, acf: AcfModel, alpha: float, m: int,
                          n_mc: int, seed: int) -> MonteCarloValue:
        """
        c = E[sigma^alpha(X_0) sigma^alpha(X_m)] / E[sigma^alpha(X)]^2, the
        constant in P(Y_0 > t, Y_m > t) ~ c P(Y_0 > t)^2.
        """
        if m < 1:
            raise ConfigError(f"Lag m must be >= 1, got {m}")
        moment = SvModelService.sigma_alpha_moment(vol, alpha, 1)
        x = cls._latent_draws(acf, [0, m], n_mc, seed)
        product = np.prod(vol(x) ** alpha, axis=1)
        scale = moment ** 2
        stderr = float(np.std(product, ddof=1) / math.sqrt(n_mc) / scale) if n_mc > 1 else math.nan
        return MonteCarloValue(float(np.mean(product) / scale), stderr, n_mc)

    # ---------------------------------------------------------------- variance

    @classmethod
    def _shared_coordinate_weight(cls, alpha: float, sigma_window: np.ndarray, lag: int) -> np.ndarray:
        """
        Joint-exceedance weight of sum windows starting at 1 and 1 + lag: both
        sums are large only through a shared coordinate, giving
        sum_{i > lag} sigma_i^alpha. For h = 2, lag = 1 this is sigma_2^alpha.
        """
        return np.sum(sigma_window[:, lag:] ** alpha, axis=1)

    @classmethod
    def sum_cross_limit(cls, alpha: float, u, v, s: float = 0.0, s_prime: float = 0.0) -> np.ndarray:
        """
        Cross limit for the two-term sum set,
        ((1 + s) / u_2 v (1 + s') / v_1)^-alpha; at (0, 0) it equals
        min(u_2, v_1)^alpha.
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.maximum((1.0 + s) / u[..., 1], (1.0 + s_prime) / v[..., 0]) ** (-alpha)

    @classmethod
    def plug_in_variance(cls, extreme_set: ExtremeSet, rho: float, mu_c: float = 1.0) -> VarianceReport:
        """Variance report without cross terms: sigma2 = rho (1 - rho)."""
        return VarianceReport(rho=rho, sigma2=rho * (1.0 - rho), mu_c=mu_c, beta=extreme_set.beta)

    @classmethod
    def asymptotic_variance(cls, query: LimitQuery, box: Optional[IntervalBox] = None) -> VarianceReport:
        """
        Limiting variance of sqrt(n g_C(k/n) mu_C) (rho_hat - rho).

        Box and Combined sets have no cross terms (sigma2 = rho (1 - rho)).
        Sum sets add, for each lag l = 1..h-1, R(A,B) - 2 rho R(A,B,R) + rho^2 R(A,R)
        with the shared-coordinate weight of the two overlapping windows.

        Args:
            query: LimitQuery (EVENT target, or a curve target whose first grid
                   level defines B = (-inf, y]^(h'+1))
            box: Optional explicit B

        Returns:
            VarianceReport
        """
        cfg = query.cfg
        extreme_set = query.set
        if extreme_set.family not in (SetFamily.BOX, SetFamily.SUM, SetFamily.COMBINED):
            raise UnsupportedError(f"No variance formula for {extreme_set.family}")
        if box is None:
            box = query.box if query.box is not None else IntervalBox.cdf([query.y_grid[0]] * query.target_dim)
        if box.dim != query.target_dim:
            raise ShapeError(f"Box dimension {box.dim} does not match h'+1={query.target_dim}")

        lags = range(1, cfg.h) if extreme_set.family is SetFamily.SUM else range(0)
        max_lag = max(lags, default=0)
        x = cls._latent_draws(cfg.acf, query.latent_indices(extra_shift=max_lag), query.n_mc, query.seed)
        sigma = cfg.vol(x)
        sigma_window = sigma[:, :cfg.h]
        sigma_targets = sigma[:, cfg.h:]
        weights = cls._window_weights(query, sigma_window)
        w_mean = float(np.mean(weights))
        if not w_mean > 0:
            raise DegenerateSetError("Monte Carlo denominator is not positive")

        d = query.target_dim
        p0 = cls.box_probability(cfg.tail, sigma_targets[:, :d], box)
        rho = float(np.sum(weights * p0) / np.sum(weights))
        moment = SvModelService.sigma_alpha_moment(cfg.vol, cfg.alpha, 1)
        mu_c = w_mean / moment ** extreme_set.beta

        cross_terms = []
        for lag in lags:
            weight_lag = cls._shared_coordinate_weight(cfg.alpha, sigma_window, lag)
            p_lag = cls.box_probability(cfg.tail, sigma_targets[:, lag:lag + d], box)
            p_joint = cls.overlapping_box_probability(cfg.tail, sigma_targets, box, lag)
            r_ab = float(np.mean(weight_lag * 2.0 * p_joint)) / w_mean
            r_abr = float(np.mean(weight_lag * (p0 + p_lag))) / w_mean
            r_ar = float(np.mean(weight_lag * 2.0)) / w_mean
            cross_terms.append((r_ab, r_abr, r_ar))

        report = VarianceReport(rho=rho, sigma2=0.0, mu_c=mu_c, beta=extreme_set.beta, cross_terms=cross_terms)
        report.sigma2 = report.at(rho)
        logger.debug(f"Variance {extreme_set.to_spec()}: rho={rho:.4f}, sigma2={report.sigma2:.4f}, {len(cross_terms)} cross terms")
        return report

    @classmethod
    def asymptotic_variance_curve(cls, query: LimitQuery) -> List[Tuple[float, VarianceReport]]:
        """Variance report at each grid level y, with B = (-inf, y]^(h'+1)."""
        if query.target is not TargetKind.CDF_CURVE:
            raise ConfigError(f"Per-level variance needs a cdf target, got {query.target.value}")
        return [
            (float(y), cls.asymptotic_variance(query, box=IntervalBox.cdf([y] * query.target_dim)))
            for y in query.y_grid
        ]

    @classmethod
    def sum_pair_covariance(cls, query: LimitQuery, y: float, y_prime: float) -> SumPairCovariance:
        """
        cov(W(y), W(y')) for the two-term sum set with h' = 0:
        Lambda(y ^ y') - 2 Lambda(y) Lambda(y') + E[sigma_2^a {F(y/s_m) F(y'/s_m+1)
        + F(y'/s_m) F(y/s_m+1)}] / E[sigma_1^a + sigma_2^a]; ``repeated`` keeps
        the first product instead of swapping y and y'.
        """
        cfg = query.cfg
        if query.set.family is not SetFamily.SUM or cfg.h != 2 or cfg.h_prime != 0:
            raise UnsupportedError("The paired sum covariance is defined for sum:2 with h' = 0")
        x = cls._latent_draws(cfg.acf, query.latent_indices(extra_shift=1), query.n_mc, query.seed)
        sigma = cfg.vol(x)
        weights = cls._window_weights(query, sigma[:, :2])
        w_sum = float(np.sum(weights))
        s2a = sigma[:, 1] ** cfg.alpha

        def lam(level: float) -> float:
            return float(np.sum(weights * TailService.cdf(cfg.tail, level / sigma[:, 2])) / w_sum)

        f_y_m = TailService.cdf(cfg.tail, y / sigma[:, 2])
        f_yp_m = TailService.cdf(cfg.tail, y_prime / sigma[:, 2])
        f_y_next = TailService.cdf(cfg.tail, y / sigma[:, 3])
        f_yp_next = TailService.cdf(cfg.tail, y_prime / sigma[:, 3])
        base = lam(min(y, y_prime)) - 2.0 * lam(y) * lam(y_prime)
        symmetric = base + float(np.sum(s2a * (f_y_m * f_yp_next + f_yp_m * f_y_next)) / w_sum)
        repeated = base + float(np.sum(s2a * 2.0 * f_y_m * f_yp_next) / w_sum)
        return SumPairCovariance(symmetric, repeated)

    # --------------------------------------------------------------- bias rate

    @classmethod
    def _solve_threshold(cls, tail: TailModel, sigma_values: np.ndarray, target: float) -> float:
        """u with mean(F(u / sigma)) = target, solved in log u."""
        def excess(log_u: float) -> float:
            surv = np.mean(TailService.survival(tail, math.exp(log_u) / sigma_values))
            return math.log(max(surv, 1e-300)) - math.log(target)

        lo, hi = 0.0, 1.0
        for _ in range(200):
            if excess(hi) < 0:
                break
            hi += 2.0
        for _ in range(200):
            if excess(lo) > 0:
                break
            lo -= 2.0
        if excess(hi) >= 0 or excess(lo) <= 0:
            raise NumericError(f"Could not bracket the threshold u_n for P(Y > u) = {target:.3g}")
        try:
            log_u = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-13, maxiter=500)
        except (RuntimeError, ValueError) as e:
            raise NumericError(f"Threshold search failed: {e}")
        return math.exp(log_u)

    @classmethod
    def _conditional_set_probability(cls, extreme_set: ExtremeSet, tail: TailModel,
                                     sigma_window: np.ndarray, level: float) -> np.ndarray:
        """P(sigma(X) Z in level * A | X) per draw."""
        if extreme_set.family is SetFamily.BOX:
            return np.prod(TailService.survival(tail, level / sigma_window), axis=1)
        if extreme_set.family is SetFamily.SUM and extreme_set.dim == 1:
            return np.asarray(TailService.survival(tail, level / sigma_window[:, 0]), dtype=float)
        if extreme_set.family is SetFamily.SUM and extreme_set.dim == 2:
            return TailService.weighted_sum_survival(tail, sigma_window[:, 0], sigma_window[:, 1], level)
        if extreme_set.family is SetFamily.COMBINED:
            pair = TailService.weighted_sum_survival(tail, sigma_window[:, 0], sigma_window[:, 1], level)
            return pair * np.asarray(TailService.survival(tail, level / sigma_window[:, 2]), dtype=float)
        raise UnsupportedError(f"Bias rate is not implemented for {extreme_set.to_spec()}")

    @classmethod
    def bias_rate_vn(cls, query: LimitQuery, k: int, n: int,
                     s_grid: Sequence[float] = S_GRID) -> BiasRateResult:
        """
        v_n(A) = E[max_s |P(Y_{1..h} in u_n s A | X) / g_C(k/n) - T_C(s) L(X)|]
        with L(X) = nu(sigma(X)^-1 A) / E[sigma^alpha]^beta and F_Y(u_n) = k/n.

        The max over the finite s grid bounds the sup over s >= 1 from below.

        Returns:
            BiasRateResult with u_n and the second-order envelope
            eta*(u_n) + u_n^-1 int_0^u_n F(s) ds
        """
        if not 1 <= k < n:
            raise ConfigError(f"Need 1 <= k < n, got k={k}, n={n}")
        s_values = np.asarray(s_grid, dtype=float)
        if s_values.size == 0 or np.any(s_values < 1.0):
            raise ConfigError("s_grid must be a nonempty set of values >= 1")
        cfg = query.cfg
        extreme_set = query.set
        x = cls._latent_draws(cfg.acf, range(1, cfg.h + 1), query.n_mc, query.seed)
        sigma = cfg.vol(x)

        u_n = cls._solve_threshold(cfg.tail, sigma.ravel(), k / n)
        moment = SvModelService.sigma_alpha_moment(cfg.vol, cfg.alpha, 1)
        limit_weight = extreme_set.nu(cfg.alpha, sigma) / moment ** extreme_set.beta
        g = extreme_set.g_scale(k / n)

        deviation = np.zeros(query.n_mc)
        for s in s_values:
            prob = cls._conditional_set_probability(extreme_set, cfg.tail, sigma, u_n * s)
            gap = np.abs(prob / g - extreme_set.homogeneity(cfg.alpha, s) * limit_weight)
            deviation = np.maximum(deviation, gap)

        value = float(np.mean(deviation))
        stderr = float(np.std(deviation, ddof=1) / math.sqrt(query.n_mc)) if query.n_mc > 1 else math.nan
        return BiasRateResult(value, stderr, u_n, cls.vn_envelope(cfg.tail, u_n))

    @classmethod
    def vn_envelope(cls, tail: TailModel, u: float) -> float:
        """eta*(u) + u^-1 int_0^u F(s) ds."""
        return float(TailService.eta_star(tail, u) + TailService.integrated_tail(tail, u) / u)

    # ----------------------------------------------------------- diagnostics

    @classmethod
    def lrd_rate_statistic(cls, extreme_set: ExtremeSet, acf: AcfModel, n: int, k: int,
                           tau: int = 1) -> float:
        """n g_C(k/n) gamma_n^tau: small means the Gaussian regime, large the long-memory one."""
        gamma_n = abs(float(acf.covariances(np.array([n]))[0]))
        return n * extreme_set.g_scale(k / n) * gamma_n ** tau

    # ------------------------------------------------------------- quadrature

    @classmethod
    def quadrature_psi_limit(cls, query: LimitQuery, n_nodes: int = GH_NODES) -> np.ndarray:
        """
        Psi on the y grid by tensor Gauss-Hermite quadrature (h + h' + 1 <= 3).
        SUM_CDF is supported for h' = 0 only.
        """
        cfg = query.cfg
        indices = query.latent_indices()
        if len(indices) > 3:
            raise UnsupportedError(f"Quadrature is capped at dimension 3, got {len(indices)}")
        if query.target is TargetKind.SUM_CDF and cfg.h_prime > 0:
            raise UnsupportedError("Quadrature for the target sum needs h' = 0")
        cov = GaussianSimulationService.joint_cov_matrix(cfg.acf, indices)
        grid = list(query.y_grid)

        def integrand(x: np.ndarray) -> np.ndarray:
            sigma = cfg.vol(x)
            w = query.set.nu(cfg.alpha, sigma[:, :cfg.h])
            cols = [w]
            for y in grid:
                prob = cls.box_probability(cfg.tail, sigma[:, cfg.h:], IntervalBox.cdf([y] * query.target_dim))
                cols.append(w * prob)
            return np.column_stack(cols)

        sums = expect_gaussian(integrand, cov, n_nodes)
        return sums[1:] / sums[0]

    @classmethod
    def quadrature_rho_limit(cls, query: LimitQuery, n_nodes: int = GH_NODES) -> float:
        """rho(A, B, m) by tensor Gauss-Hermite quadrature (h + h' + 1 <= 3)."""
        cfg = query.cfg
        indices = query.latent_indices()
        if len(indices) > 3:
            raise UnsupportedError(f"Quadrature is capped at dimension 3, got {len(indices)}")
        cov = GaussianSimulationService.joint_cov_matrix(cfg.acf, indices)

        def integrand(x: np.ndarray) -> np.ndarray:
            sigma = cfg.vol(x)
            w = query.set.nu(cfg.alpha, sigma[:, :cfg.h])
            return np.column_stack([w, w * cls.box_probability(cfg.tail, sigma[:, cfg.h:], query.box)])

        sums = expect_gaussian(integrand, cov, n_nodes)
        return float(sums[1] / sums[0])
