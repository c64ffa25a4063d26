"""
Hermite Analyzer - Hermite expansions and ranks of functionals of the
latent Gaussian vector

Coefficients use the probabilists' Hermite polynomials, unnormalized:
J(q) = E[f(X) H_q(X)], so that f = sum_q J(q) / q! H_q. Multivariate
functions are expanded in the orthonormalized coordinates U' X with
U U' the inverse of the covariance matrix.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import ConfigError, NumericError, UnsupportedError
from models.estimates import IntervalBox, LimitQuery
from models.processes import AcfFamily, AcfModel
from services.gaussian_simulation_service import GaussianSimulationService
from services.limit_service import LimitService
from utils.logger import get_logger
from utils.quadrature import normal_nodes, tensor_grid
from utils.seeding import derive_seed

logger = get_logger(__name__)

MultiIndex = Tuple[int, ...]


@dataclass
class HermiteExpansion:
    """
    Hermite coefficients of one function.

    Attributes:
        coeffs: {multi-index q: J(q)} for |q| <= q_max
        rank: Smallest |q| >= 1 with |J(q)| > rank_tol * sqrt(E[f^2]); None if none
        rank_tol: Relative tolerance used for the rank
        second_moment: E[f^2]
    """
    coeffs: Dict[MultiIndex, float]
    rank: Optional[int]
    rank_tol: float
    second_moment: float

    @property
    def degenerate(self) -> bool:
        """No coefficient of order >= 1 above tolerance (f constant up to quadrature noise)."""
        return self.rank is None

    def coefficient(self, *q: int) -> float:
        return self.coeffs[tuple(q)]

    def parseval_sum(self) -> float:
        """sum_q J(q)^2 / q!, bounded above by E[f^2]."""
        return float(sum(j * j / math.prod(math.factorial(qi) for qi in q) for q, j in self.coeffs.items()))


@dataclass
class RankReport:
    """Hermite ranks tau(A, B), tau(A) and tau*(A) of a limit query."""
    tau_ab: Optional[int]
    tau_a: Optional[int]
    tau_star: Optional[int]
    y_grid: Tuple[float, ...]
    ranks_on_grid: List[Optional[int]] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return self.tau_ab is None and self.tau_a is None


@dataclass
class ArconesReport:
    """
    Variance of n^-1 sum f(X_j) across replicates against the rate
    (gamma-rate^q v n^-1).
    """
    n_list: Tuple[int, ...]
    variances: np.ndarray
    bound_rates: np.ndarray
    slope: float
    expected_slope: float
    constant: float
    ratio_slope: float
    trend_ok: bool

    def to_rows(self) -> List[Dict]:
        return [
            {'n': n, 'variance': float(v), 'bound_rate': float(b), 'ratio': float(v / b)}
            for n, v, b in zip(self.n_list, self.variances, self.bound_rates)
        ]


class HermiteAnalyzer:
    """Hermite expansions, ranks and the partial-sum variance check."""

    def __init__(self, n_nodes: int = 128, nd_nodes: int = 48, rank_tol: float = 1e-7):
        """
        Args:
            n_nodes: Gauss-Hermite nodes for one-dimensional expansions
            nd_nodes: Nodes per axis for tensor expansions (dimension <= 3)
            rank_tol: Rank tolerance relative to sqrt(E[f^2])
        """
        self.n_nodes = n_nodes
        self.nd_nodes = nd_nodes
        self.rank_tol = rank_tol

    MAX_DIM = 3
    MAX_ORDER = 6
    # Largest accepted upward drift of log(empirical / bound) per unit log n
    RATIO_SLOPE_TOL = 0.15

    @staticmethod
    def hermite_poly(q: int, x):
        """H_q(x) by H_{q+1} = x H_q - q H_{q-1}; vectorized over x."""
        if q < 0:
            raise ConfigError(f"Hermite degree must be >= 0, got {q}")
        x_arr = np.asarray(x, dtype=float)
        prev = np.ones_like(x_arr)
        if q == 0:
            return float(prev) if np.ndim(x) == 0 else prev
        cur = x_arr.copy()
        for k in range(1, q):
            prev, cur = cur, x_arr * cur - k * prev
        return float(cur) if np.ndim(x) == 0 else cur

    @classmethod
    def _hermite_table(cls, x: np.ndarray, q_max: int) -> np.ndarray:
        """Rows H_0(x)..H_q_max(x)."""
        table = np.empty((q_max + 1,) + x.shape)
        table[0] = 1.0
        if q_max >= 1:
            table[1] = x
        for k in range(1, q_max):
            table[k + 1] = x * table[k] - k * table[k - 1]
        return table

    def _rank(self, coeffs: Dict[MultiIndex, float], second_moment: float) -> Optional[int]:
        scale = math.sqrt(max(second_moment, 0.0))
        orders = sorted({sum(q) for q in coeffs if sum(q) >= 1})
        for order in orders:
            if any(abs(j) > self.rank_tol * scale for q, j in coeffs.items() if sum(q) == order):
                return order
        return None

    def hermite_coeffs_1d(self, func: Callable[[np.ndarray], np.ndarray], q_max: int) -> HermiteExpansion:
        """
        J(q) = E[f(X) H_q(X)], q = 0..q_max, X ~ N(0,1).

        Raises:
            NumericError: when E[f^2] or a coefficient is not finite
        """
        if q_max < 0:
            raise ConfigError(f"q_max must be >= 0, got {q_max}")
        nodes, weights = normal_nodes(self.n_nodes)
        with np.errstate(over='ignore', invalid='ignore'):
            values = np.asarray(func(nodes), dtype=float)
            second_moment = float(np.sum(weights * values ** 2))
            table = self._hermite_table(nodes, q_max)
            coeffs = table @ (weights * values)
        if not math.isfinite(second_moment) or not np.all(np.isfinite(coeffs)):
            raise NumericError("Hermite quadrature overflowed: f is not square-integrable at this resolution")
        expansion = {(q,): float(c) for q, c in enumerate(coeffs)}
        return HermiteExpansion(expansion, self._rank(expansion, second_moment), self.rank_tol, second_moment)

    def hermite_coeffs_nd(self, func: Callable[[np.ndarray], np.ndarray], cov: np.ndarray,
                          q_max: int = MAX_ORDER) -> HermiteExpansion:
        """
        Coefficients of x -> f(x), X ~ N(0, cov), in the coordinates U' X,
        U = chol(cov^-1): J(q) = E[f(X) prod_i H_{q_i}((U' X)_i)].

        Args:
            func: Receives points of shape (n_points, d)
            cov: Covariance matrix, d <= 3
            q_max: Maximal total order, <= 6
        """
        cov = np.asarray(cov, dtype=float)
        dim = cov.shape[0]
        if dim > self.MAX_DIM:
            raise UnsupportedError(f"Hermite expansions are capped at dimension {self.MAX_DIM}, got {dim}")
        if q_max > self.MAX_ORDER:
            raise UnsupportedError(f"Hermite expansions are capped at order {self.MAX_ORDER}, got {q_max}")
        try:
            u = np.linalg.cholesky(np.linalg.inv(cov))
        except np.linalg.LinAlgError as e:
            raise NumericError(f"Covariance is singular; no orthonormalizing transform: {e}")

        # X = (U')^-1 xi with xi standard normal
        xi, weights = tensor_grid(dim, self.nd_nodes)
        x = np.linalg.solve(u.T, xi.T).T
        with np.errstate(over='ignore', invalid='ignore'):
            values = np.asarray(func(x), dtype=float)
            second_moment = float(np.sum(weights * values ** 2))
        tables = [self._hermite_table(xi[:, i], q_max) for i in range(dim)]
        weighted = weights * values

        coeffs: Dict[MultiIndex, float] = {}
        for q in itertools.product(range(q_max + 1), repeat=dim):
            if sum(q) > q_max:
                continue
            basis = np.ones(xi.shape[0])
            for i, qi in enumerate(q):
                basis = basis * tables[i][qi]
            coeffs[q] = float(np.sum(weighted * basis))
        if not math.isfinite(second_moment) or not all(math.isfinite(c) for c in coeffs.values()):
            raise NumericError("Hermite quadrature overflowed")
        return HermiteExpansion(coeffs, self._rank(coeffs, second_moment), self.rank_tol, second_moment)

    def _g_function(self, query: LimitQuery, box: IntervalBox) -> Callable[[np.ndarray], np.ndarray]:
        """(x, x') -> nu(sigma(x)^-1 A) P(sigma(x') Z in B)."""
        cfg = query.cfg

        def g(points: np.ndarray) -> np.ndarray:
            sigma = cfg.vol(points)
            weight = query.set.nu(cfg.alpha, sigma[:, :cfg.h])
            if box.is_full:
                return weight
            return weight * LimitService.box_probability(cfg.tail, sigma[:, cfg.h:], box)

        return g

    def rank_of_G(self, query: LimitQuery, q_max: int = 4, y_grid: Optional[Sequence[float]] = None) -> RankReport:
        """
        Hermite ranks of G(A, B, x, x') on (X_{1..h}, X_{m..m+h'}).

        tau(A, B) uses the query's box (EVENT) or B = (-inf, y_0]; tau(A) uses
        B = full space; tau*(A) is the minimum of tau(A, (-inf, y]) over the
        y grid (a grid minimum, not a certified infimum).

        Raises:
            UnsupportedError: when h + h' + 1 > 3
        """
        indices = query.latent_indices()
        if len(indices) > self.MAX_DIM:
            raise UnsupportedError(f"Rank detection needs h + h' + 1 <= {self.MAX_DIM}, got {len(indices)}")
        cov = GaussianSimulationService.joint_cov_matrix(query.cfg.acf, indices)
        grid = tuple(float(v) for v in (y_grid if y_grid is not None else query.y_grid or (0.5, 1.0, 2.0, 5.0)))
        d = query.target_dim

        box = query.box if query.box is not None else IntervalBox.cdf([grid[0]] * d)
        tau_ab = self.hermite_coeffs_nd(self._g_function(query, box), cov, q_max).rank
        tau_a = self.hermite_coeffs_nd(self._g_function(query, IntervalBox.full(d)), cov, q_max).rank
        on_grid = [
            self.hermite_coeffs_nd(self._g_function(query, IntervalBox.cdf([y] * d)), cov, q_max).rank
            for y in grid
        ]
        finite = [r for r in on_grid if r is not None]
        tau_star = min(finite) if finite else None
        if tau_ab is None and tau_a is None:
            logger.warning(f"G is constant in the latent variables for {query.set.to_spec()} ({query.cfg.vol.describe()})")
        return RankReport(tau_ab, tau_a, tau_star, grid, on_grid)

    @staticmethod
    def expected_slope(acf: AcfModel, q: int) -> float:
        """Rate exponent of var(n^-1 sum f(X_j)) for rank q: max(2q(H-1), -1) under long memory, else -1."""
        if acf.family is AcfFamily.FGN:
            return max(2.0 * q * (acf.hurst - 1.0), -1.0)
        if acf.family in (AcfFamily.AR1, AcfFamily.WHITE_NOISE):
            return -1.0
        raise UnsupportedError(f"No variance rate for {acf.describe()}")

    def _replicate_mean(self, func, acf: AcfModel, n: int, seed: int) -> float:
        path = GaussianSimulationService.simulate_path(acf, n, seed)
        return float(np.mean(func(np.asarray(path.values))))

    def arcones_check(self, func: Callable[[np.ndarray], np.ndarray], q: int, acf: AcfModel,
                      n_list: Sequence[int], replicates: int, seed: int, threads: int = 1) -> ArconesReport:
        """
        Empirical variance of the sample mean of f(X_j) at each n against the
        bound C (gamma_n^q v n^-1) var(f(X_0)), with one fitted C.

        Args:
            func: Function of known Hermite rank q
            q: Hermite rank of func
            acf: AR1, white noise or FGN latent model
            n_list: Increasing sample sizes
            replicates: Paths per sample size
            seed: Master seed; replicate r at size n uses derive_seed(seed, n, r)
            threads: Worker threads (results do not depend on it)

        Returns:
            ArconesReport with the fitted log-log slope and the ratio trend
        """
        n_values = tuple(int(n) for n in n_list)
        if len(n_values) < 2 or any(b <= a for a, b in zip(n_values, n_values[1:])):
            raise ConfigError("n_list needs at least two increasing sizes")
        if replicates < 2:
            raise ConfigError("arcones_check needs at least two replicates")
        expected = self.expected_slope(acf, q)

        variances = []
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            for n in n_values:
                seeds = [derive_seed(seed, n, r) for r in range(replicates)]
                means = list(pool.map(lambda s, n=n: self._replicate_mean(func, acf, n, s), seeds))
                variances.append(float(np.var(means, ddof=1)))
        variances = np.asarray(variances)

        log_n = np.log(np.asarray(n_values, dtype=float))
        slope = float(np.polyfit(log_n, np.log(variances), 1)[0])
        bound_rates = np.exp(expected * log_n)
        ratios = variances / bound_rates
        ratio_slope = float(np.polyfit(log_n, np.log(ratios), 1)[0])
        report = ArconesReport(
            n_list=n_values,
            variances=variances,
            bound_rates=bound_rates,
            slope=slope,
            expected_slope=expected,
            constant=float(ratios.max()),
            ratio_slope=ratio_slope,
            trend_ok=bool(ratio_slope <= self.RATIO_SLOPE_TOL),
        )
        logger.info(f"Variance rate slope {slope:.3f} (expected {expected:.3f}) for {acf.describe()}, q={q}")
        return report
