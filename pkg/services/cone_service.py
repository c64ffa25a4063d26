"""
Cone Service.

Set membership, the closed-form limit measures nu_C(u^-1 A), scaling
functions, a numerical-integration oracle for nu, and importance-sampled
Monte Carlo for the pre-limit ratio P(u Z in tA) / g_C(F(t)).
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate

from models.cones import ExtremeSet, SetFamily
from models.errors import ConfigError, UnsupportedError
from models.tails import TailModel
from services.tail_service import TailService
from utils.logger import get_logger
from utils.seeding import make_rng

logger = get_logger(__name__)


@dataclass(frozen=True)
class TailRatioResult:
    """Monte Carlo estimate of P(u Z in tA) / g_C(F(t))."""
    value: float
    stderr: float
    ess: float
    n_mc: int
    precision_warning: bool


@dataclass(frozen=True)
class BoundFit:
    """Constant C with nu(u) <= C * envelope(u), fitted and then verified."""
    constant: float
    verified: bool
    worst_ratio: float
    n_checked: int


class ConeService:
    """
    Operations on extreme sets in cones C_j.
    """

    ESS_MIN = 100
    # Proposal mixes the law of Z with its law beyond this fraction of t/u_i
    IS_THRESHOLD_FRACTION = 0.5
    QUAD_OPTS = {'epsabs': 0.0, 'epsrel': 1e-10, 'limit': 200}

    @classmethod
    def member(cls, extreme_set: ExtremeSet, t: float, y) -> bool:
        """y in tA with strict inequalities."""
        return extreme_set.member(t, y)

    @classmethod
    def nu_eval(cls, extreme_set: ExtremeSet, alpha: float, u) -> float:
        """
        nu_C(u^-1 A) in closed form.

        Box -> prod u_i^alpha; Sum -> sum u_i^alpha;
        Combined -> (u_1^alpha + u_2^alpha) u_3^alpha.
        """
        if extreme_set.family not in (SetFamily.BOX, SetFamily.SUM, SetFamily.COMBINED):
            raise UnsupportedError(f"No closed form for {extreme_set.family}")
        value = extreme_set.nu(alpha, u)
        return float(value) if np.ndim(value) == 0 else value

    @classmethod
    def g_scale(cls, extreme_set: ExtremeSet, t: float) -> float:
        if not 0.0 < t <= 1.0:
            raise ConfigError(f"g_C takes a probability-scale argument in (0, 1], got {t}")
        return extreme_set.g_scale(t)

    @classmethod
    def homogeneity_T(cls, extreme_set: ExtremeSet, alpha: float, s: float) -> float:
        if s < 1.0:
            raise ConfigError(f"T_C is evaluated for s >= 1, got {s}")
        return extreme_set.homogeneity(alpha, s)

    @classmethod
    def _axis_integral(cls, alpha: float, lower_bounds) -> float:
        """
        int over prod_i (lb_i, inf) of alpha^d prod_i z_i^(-alpha-1) dz by
        nested adaptive quadrature.
        """
        d = len(lower_bounds)

        def density(*z):
            return alpha ** d * math.prod(zi ** (-alpha - 1.0) for zi in z)

        ranges = [(lb, math.inf) for lb in lower_bounds]
        value, _ = integrate.nquad(density, ranges, opts=cls.QUAD_OPTS)
        return float(value)

    @classmethod
    def nu_numerical(cls, extreme_set: ExtremeSet, alpha: float, u) -> float:
        """
        nu_C(u^-1 A) by integrating the density of nu_j: for every zero flag
        i, the axis measure alpha z_i^(-alpha-1) on coordinate i times
        alpha z^(-alpha-1) on each one-flag coordinate, restricted to the set.
        Test oracle only.
        """
        u = np.asarray(u, dtype=float)
        cone = extreme_set.cone
        ones = list(cone.one_positions)
        total = 0.0
        for i in cone.zero_positions:
            # Other zero-flag coordinates vanish on the axis; the set then
            # reduces to per-coordinate thresholds u_k z_k > 1.
            coords = [i] + ones
            lower = [1.0 / u[c] for c in coords]
            total += cls._axis_integral(alpha, lower)
        return total

    @classmethod
    def mc_tail_ratio(cls, extreme_set: ExtremeSet, tail: TailModel, u, t: float,
                      n_mc: int, seed: int) -> TailRatioResult:
        """
        Importance-sampled estimate of P(u Z_{1..h} in tA) / g_C(F(t)).

        The first h-1 coordinates are drawn from the defensive mixture
        1/2 law(Z) + 1/2 law(Z | Z > t / (2 u_i)); the last coordinate is
        integrated out exactly through its survival function.

        Args:
            extreme_set: Set A
            tail: Innovation law
            u: Positive scaling vector
            t: Threshold with F(t) < 0.1
            n_mc: Number of draws
            seed: Generator seed

        Returns:
            TailRatioResult; ``precision_warning`` when ESS < 100
        """
        u = np.asarray(u, dtype=float)
        if u.shape != (extreme_set.dim,) or np.any(u <= 0):
            raise ConfigError(f"u must be a positive vector of length {extreme_set.dim}")
        f_t = TailService.survival(tail, t)
        if not f_t < 0.1:
            raise ConfigError(f"Threshold t={t} is not in the tail (F(t)={f_t:.3g})")
        norm = extreme_set.g_scale(f_t)

        if extreme_set.dim == 1:
            # Nothing random left: the ratio is F(t/u_1) / F(t)
            value = float(TailService.survival(tail, t / u[0]) / norm)
            return TailRatioResult(value, 0.0, float(n_mc), int(n_mc), False)

        rng = make_rng(seed)
        head, weights = cls._draw_head(tail, u[:-1], t, n_mc, rng)
        gate, threshold = extreme_set.last_coordinate_rule(t, u, head)
        contributions = weights * gate * np.asarray(TailService.survival(tail, threshold), dtype=float)

        value = float(contributions.mean() / norm)
        stderr = float(contributions.std(ddof=1) / math.sqrt(n_mc) / norm) if n_mc > 1 else math.nan
        square_sum = float(np.sum(contributions ** 2))
        ess = float(contributions.sum() ** 2 / square_sum) if square_sum > 0 else 0.0
        warn = ess < cls.ESS_MIN
        if warn:
            logger.warning(f"Low effective sample size {ess:.1f} for {extreme_set.to_spec()} at t={t}")
        return TailRatioResult(value, stderr, ess, int(n_mc), warn)

    @classmethod
    def _draw_head(cls, tail: TailModel, u_head: np.ndarray, t: float, n_mc: int,
                   rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Mixture-proposal draws and likelihood ratios for the leading coordinates."""
        columns = []
        weights = np.ones(n_mc)
        for u_i in u_head:
            cut = cls.IS_THRESHOLD_FRACTION * t / u_i
            f_cut = TailService.survival(tail, cut)
            from_tail = rng.random(n_mc) < 0.5
            plain = TailService.sample(tail, n_mc, rng=rng)
            conditioned = TailService.sample_conditional(tail, cut, rng, n_mc)
            z = np.where(from_tail, conditioned, plain)
            proposal_ratio = 0.5 + 0.5 * (z > cut) / f_cut
            weights = weights / proposal_ratio
            columns.append(z)
        return np.column_stack(columns), weights

    @classmethod
    def fit_bound_constant(cls, extreme_set: ExtremeSet, alpha: float, eps: float = 0.1,
                           n_check: int = 10_000, seed: int = 0,
                           grid=(0.1, 0.5, 1.0, 2.0, 10.0)) -> BoundFit:
        """
        Fit C with nu(u) <= C * [sum_zero (u_i v 1)^(a+e)] prod_one (u_i v 1)^(a+e)
        on a coarse product grid, then verify on log-uniform random u.
        """
        axes = np.meshgrid(*([np.asarray(grid, dtype=float)] * extreme_set.dim), indexing='ij')
        coarse = np.stack([a.ravel() for a in axes], axis=-1)
        ratios = extreme_set.nu(alpha, coarse) / extreme_set.bound_envelope(alpha, eps, coarse)
        constant = float(ratios.max())

        rng = make_rng(seed)
        random_u = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), size=(n_check, extreme_set.dim)))
        check = extreme_set.nu(alpha, random_u) / extreme_set.bound_envelope(alpha, eps, random_u)
        worst = float(check.max())
        return BoundFit(constant, bool(worst <= constant * (1.0 + 1e-12)), worst, int(n_check))
