"""
Experiment Manager.

Orchestrates the experiment workflows behind the CLI:
1. simulate: one SV path to a table
2. estimate: empirical curve or point estimate from a CSV or a simulated path
3. limit: theoretical limit functional with Monte Carlo errors
4. coverage: replicated estimation against the limit (CI coverage, normality)
5. figure1: conditional vs unconditional empirical distributions, SV and i.i.d.
6. hermite: Hermite ranks of the limit functional and the variance-rate check
7. check-appendix-a: convolution remainder against its envelope

Every random quantity descends from the master seed through derive_seed, so
outputs do not depend on the number of worker threads.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from analyzers.coverage_analyzer import CoverageAnalyzer
from analyzers.hermite_analyzer import HermiteAnalyzer
from config import Config
from models.errors import ConfigError, TailcondError
from models.estimates import Estimate, EstimateCurve, EstimatorConfig, LimitQuery, TargetKind, VarianceReport, grid_tuple
from models.processes import AcfModel
from models.tails import TailModel
from models.volatility import SvConfig, VolatilityFn
from schemas.experiment import ExperimentSpec
from services.csv_service import CSVService
from services.estimator_service import EstimatorService
from services.figure_service import FigurePanel, FigureService
from services.limit_service import LimitService
from services.sv_model_service import SvModelService
from services.tail_service import TailService
from utils.logger import get_logger
from utils.seeding import derive_seed

logger = get_logger(__name__)

# Stream keys under the master seed
SIMULATE_STREAM = 2
REPLICATE_STREAM = 3
LIMIT_STREAM = 4
FIGURE_SV_STREAM = 5
FIGURE_IID_STREAM = 6
HERMITE_STREAM = 7

CONVOLUTION_ALPHAS = (1.5, 2.0, 3.0)
CONVOLUTION_WEIGHTS = (2.0, 3.0)


class ExperimentManager:
    """
    Experiment orchestrator.

    Coordinates simulation, estimation, limit and analysis services and
    writes every artefact under one output directory.
    """

    def __init__(self, config=Config, threads: Optional[int] = None):
        """Initialize manager with the run configuration."""
        self.config = config
        self.threads = max(1, int(threads if threads is not None else config.DEFAULT_THREADS))
        self.coverage_analyzer = CoverageAnalyzer(seed=config.MASTER_SEED)
        self.hermite_analyzer = HermiteAnalyzer(
            n_nodes=config.HERMITE_NODES, nd_nodes=config.HERMITE_ND_NODES, rank_tol=config.RANK_TOL,
        )

    # ----------------------------------------------------------- helpers

    def _limit_query(self, spec: ExperimentSpec, seed: int) -> LimitQuery:
        """The experiment's limit query; n_mc falls back to the configured size."""
        n_mc = spec.target.n_mc if spec.target.n_mc is not None else self.config.N_MC
        return spec.limit_query(derive_seed(seed, LIMIT_STREAM), n_mc=n_mc)

    def _model_norming(self, spec: ExperimentSpec, seed: int):
        """
        mu_C and (for event targets) the full variance report of the
        generative model, or (None, None) without a process.
        """
        if spec.process is None or not spec.estimator.model_norming:
            return None, None
        query = self._limit_query(spec, seed)
        cfg = query.cfg
        mu_c = LimitService.mu_C(query.set, cfg.vol, cfg.acf, cfg.alpha, query.n_mc, query.seed).value
        variance = None
        if query.target is TargetKind.EVENT:
            variance = LimitService.asymptotic_variance(query)
        return mu_c, variance

    def _estimate_series(self, y: np.ndarray, spec: ExperimentSpec, est_cfg: EstimatorConfig,
                         variance: Optional[VarianceReport]) -> List[Estimate]:
        kind = spec.target_kind()
        grid = spec.target.y_grid
        if kind is TargetKind.EVENT:
            box = spec.target.box()
            if est_cfg.thinned:
                return [EstimatorService.rho_tilde(y, est_cfg, box)]
            return [EstimatorService.rho_hat(y, est_cfg, box, variance=variance)]
        if kind is TargetKind.SUM_CDF:
            return list(EstimatorService.sum_cdf_curve(y, est_cfg, grid).estimates)
        return list(EstimatorService.psi_hat_curve(y, est_cfg, grid).estimates)

    def _levels(self, spec: ExperimentSpec) -> List[float]:
        if spec.target_kind() is TargetKind.EVENT:
            return [math.nan]
        return list(spec.target.y_grid)

    def _limit_values(self, spec: ExperimentSpec, seed: int):
        """Theoretical values (and standard errors) at the target levels."""
        query = self._limit_query(spec, seed)
        if query.target is TargetKind.EVENT:
            rho = LimitService.mc_rho_limit(query)
            return np.array([rho.value]), np.array([rho.stderr])
        curve = LimitService.mc_psi_limit(query)
        return curve.values, curve.stderr

    # ---------------------------------------------------------- simulate

    def run_simulate(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv') -> Dict:
        """Simulate one path of the experiment's process and write (t, y, x, z)."""
        cfg = spec.sv_config()
        logger.info(f"Simulating n={cfg.n} for {spec.name}")
        sample = SvModelService.simulate_sv(cfg, derive_seed(seed, SIMULATE_STREAM))
        frame = pd.DataFrame({'t': np.arange(1, len(sample) + 1), 'y': sample.y, 'x': sample.x, 'z': sample.z})
        path = CSVService.write_table(frame, Path(out_dir) / 'simulate', fmt)
        return {'command': 'simulate', 'n': len(sample), 'path': path.name}

    # ---------------------------------------------------------- estimate

    def run_estimate(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv',
                     input_path: Optional[Path] = None) -> Dict:
        """
        Estimate the experiment's target on a CSV series, or on a simulated
        path when no input is given.

        Workflow:
        1. Load or simulate the series
        2. Model norming (mu_C, variance) when a process is known
        3. Estimate the curve or point
        4. Write the table
        """
        if input_path is not None:
            y = CSVService.read_series(input_path)
        else:
            cfg = spec.sv_config()
            y = SvModelService.simulate_sv(cfg, derive_seed(seed, SIMULATE_STREAM)).y
            logger.info(f"Simulated {y.size} observations for {spec.name}")

        mu_c, variance = self._model_norming(spec, seed)
        est_cfg = spec.estimator.to_config(mu_c=mu_c)
        estimates = self._estimate_series(y, spec, est_cfg, variance)
        logger.info(f"Estimated {len(estimates)} value(s) with k={estimates[0].k_used}, exceedances={estimates[0].denominator}")

        if spec.target_kind() is TargetKind.EVENT:
            frame = pd.DataFrame([estimates[0].as_row()])
        else:
            frame = EstimateCurve(grid_tuple(spec.target.y_grid), tuple(estimates)).to_frame()
        path = CSVService.write_table(frame, Path(out_dir) / 'estimate', fmt)
        return {
            'command': 'estimate',
            'path': path.name,
            'n_windows': estimates[0].n_windows,
            'k': estimates[0].k_used,
            'u_hat': estimates[0].u_hat,
            'exceedances': estimates[0].denominator,
        }

    # ------------------------------------------------------------- limit

    def run_limit(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv') -> Dict:
        """Limit curve (y, psi, stderr) or rho, plus mu_C and the limiting variance."""
        query = self._limit_query(spec, seed)
        cfg = query.cfg
        logger.info(f"Limit functional for {query.set.to_spec()}, n_mc={query.n_mc}")
        mu_c = LimitService.mu_C(query.set, cfg.vol, cfg.acf, cfg.alpha, query.n_mc, query.seed)

        variance = None
        level_variances = []
        if query.target is TargetKind.EVENT:
            rho = LimitService.mc_rho_limit(query)
            frame = pd.DataFrame([{'rho': rho.value, 'stderr': rho.stderr}])
            variance = LimitService.asymptotic_variance(query)
        else:
            frame = LimitService.mc_psi_limit(query).to_frame()
            if query.target is TargetKind.CDF_CURVE:
                level_variances = LimitService.asymptotic_variance_curve(query)
        path = CSVService.write_table(frame, Path(out_dir) / 'limit', fmt)

        summary = {
            'command': 'limit',
            'path': path.name,
            'set': query.set.to_spec(),
            'mu_c': mu_c.value,
            'mu_c_stderr': mu_c.stderr,
        }
        if variance is not None:
            summary['sigma2'] = variance.sigma2
            summary['variance_rho'] = variance.rho
        if level_variances:
            summary['variance_by_level'] = [
                {'y': y, 'rho': report.rho, 'sigma2': report.sigma2} for y, report in level_variances
            ]
        return summary

    # ---------------------------------------------------------- coverage

    def _coverage_replicate(self, spec: ExperimentSpec, cfg: SvConfig, est_cfg: EstimatorConfig,
                            variance: Optional[VarianceReport], seed: int, replicate: int) -> List[Dict]:
        levels = self._levels(spec)
        sample = SvModelService.simulate_sv(cfg, derive_seed(seed, REPLICATE_STREAM, replicate))
        try:
            estimates = self._estimate_series(sample.y, spec, est_cfg, variance)
        except TailcondError as e:
            logger.warning(f"Replicate {replicate} failed: {e}")
            return [{'replicate': replicate, 'y': level, 'failed': True, 'error': type(e).__name__} for level in levels]
        rows = []
        for level, est in zip(levels, estimates):
            row = {'replicate': replicate, 'y': level, 'failed': False, 'error': ''}
            row.update(est.as_row())
            rows.append(row)
        return rows

    def run_coverage(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv') -> Dict:
        """
        Replicated estimation against the limit.

        Workflow:
        1. Limit values at the target levels (truth)
        2. Model norming for the standard errors
        3. Replicates in parallel, collected in replicate order
        4. Coverage, studentized errors and Anderson-Darling per level
        """
        cfg = spec.sv_config()
        logger.info(f"Coverage study '{spec.name}': {spec.replicates} replicates on {self.threads} thread(s)")
        truth, truth_stderr = self._limit_values(spec, seed)
        logger.info("Computed limit values")
        mu_c, variance = self._model_norming(spec, seed)
        est_cfg = spec.estimator.to_config(mu_c=mu_c)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            per_replicate = list(pool.map(
                lambda r: self._coverage_replicate(spec, cfg, est_cfg, variance, seed, r),
                range(spec.replicates),
            ))
        rows = [row for chunk in per_replicate for row in chunk]
        replicate_frame = pd.DataFrame(rows, columns=[
            'replicate', 'y', 'failed', 'error', 'value', 'stderr', 'ci_lo', 'ci_hi',
            'k', 'u_hat', 'numerator', 'exceedances',
        ])
        logger.info(f"Finished {spec.replicates} replicates")

        n_windows = est_cfg.max_windows(cfg.n)
        k = est_cfg.resolve_k(n_windows)
        lrd_rate = LimitService.lrd_rate_statistic(est_cfg.set, cfg.acf, n_windows, k)

        summary_rows = []
        for g, level in enumerate(self._levels(spec)):
            if math.isnan(level):
                at_level = replicate_frame
            else:
                at_level = replicate_frame[replicate_frame['y'] == level]
            ok = at_level[~at_level['failed'].astype(bool)]
            result = self.coverage_analyzer.summarize(
                ok['value'].to_numpy(float), ok['stderr'].to_numpy(float),
                ok['ci_lo'].to_numpy(float), ok['ci_hi'].to_numpy(float),
                float(truth[g]), n_failed=int(at_level['failed'].astype(bool).sum()),
            )
            row = {'y': level, 'truth': float(truth[g]), 'truth_stderr': float(truth_stderr[g])}
            row.update(result.as_row())
            row['lrd_rate'] = lrd_rate
            summary_rows.append(row)

        out_dir = Path(out_dir)
        CSVService.write_table(replicate_frame, out_dir / 'coverage_replicates', fmt)
        path = CSVService.write_table(pd.DataFrame(summary_rows), out_dir / 'coverage', fmt)
        coverages = [r['coverage'] for r in summary_rows]
        return {
            'command': 'coverage',
            'path': path.name,
            'replicates': spec.replicates,
            'failed': int(replicate_frame.drop_duplicates('replicate')['failed'].astype(bool).sum()),
            'min_coverage': float(np.nanmin(coverages)) if coverages else math.nan,
            'lrd_rate': lrd_rate,
        }

    # ----------------------------------------------------------- figure1

    @staticmethod
    def iid_counterpart(cfg: SvConfig) -> SvConfig:
        """Same tail, lead and windows with sigma = 1 and independent X: Y = Z i.i.d."""
        return replace(cfg, acf=AcfModel.white_noise(), vol=VolatilityFn.const(1.0))

    def _figure_panel(self, title: str, cfg: SvConfig, est_cfg: EstimatorConfig, grid: Sequence[float],
                      seed: int):
        y = SvModelService.simulate_sv(cfg, seed).y
        curve = EstimatorService.psi_hat_curve(y, est_cfg, grid)
        cdf_hat = EstimatorService.empirical_cdf(y, grid)
        distance = self.coverage_analyzer.sup_distance(curve.values, cdf_hat)
        denominator = curve.estimates[0].denominator
        critical = self.coverage_analyzer.ks_critical_value(denominator, y.size)
        frame = pd.DataFrame({'y': list(grid), 'psi_hat': curve.values, 'cdf_hat': cdf_hat})
        panel = FigurePanel(title, grid, curve.values, cdf_hat, distance)
        stats = {'sup_distance': distance, 'ks_critical': critical, 'exceedances': denominator}
        return frame, panel, stats

    def run_figure1(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv') -> Dict:
        """
        Empirical conditional distribution (points) and empirical distribution
        (line) for the SV process and for i.i.d. data at the same n and k.
        """
        if spec.target_kind() is not TargetKind.CDF_CURVE:
            raise ConfigError("figure1 needs a cdf target with a y_grid")
        cfg = spec.sv_config()
        est_cfg = spec.estimator.to_config()
        grid = spec.target.y_grid
        out_dir = Path(out_dir)

        sv_frame, sv_panel, sv_stats = self._figure_panel(
            'SV model', cfg, est_cfg, grid, derive_seed(seed, FIGURE_SV_STREAM))
        iid_frame, iid_panel, iid_stats = self._figure_panel(
            'i.i.d. data', self.iid_counterpart(cfg), est_cfg, grid, derive_seed(seed, FIGURE_IID_STREAM))
        logger.info(f"Sup distances: SV {sv_stats['sup_distance']:.4f}, i.i.d. {iid_stats['sup_distance']:.4f}")

        CSVService.write_table(sv_frame, out_dir / 'figure1_sv', fmt)
        CSVService.write_table(iid_frame, out_dir / 'figure1_iid', fmt)
        svg = FigureService.render_comparison([sv_panel, iid_panel], out_dir / 'figure1')
        ratio = sv_stats['sup_distance'] / iid_stats['sup_distance'] if iid_stats['sup_distance'] > 0 else math.inf
        summary = {
            'command': 'figure1',
            'svg': svg.name,
            'sv': sv_stats,
            'iid': iid_stats,
            'distance_ratio': ratio,
        }
        CSVService.write_json(summary, out_dir / 'figure1_summary.json')
        return summary

    # ----------------------------------------------------------- hermite

    def run_hermite(self, spec: ExperimentSpec, seed: int, out_dir: Path, fmt: str = 'csv',
                    q: int = 1, n_list: Sequence[int] = (256, 1024, 4096, 16384)) -> Dict:
        """
        Hermite ranks of G for the experiment's limit query, and the
        variance rate of n^-1 sum H_q(X_j) on the process's latent ACF.
        """
        query = self._limit_query(spec, seed)
        ranks = self.hermite_analyzer.rank_of_G(query)
        logger.info(f"Hermite ranks tau(A,B)={ranks.tau_ab}, tau(A)={ranks.tau_a}, tau*(A)={ranks.tau_star}")

        report = self.hermite_analyzer.arcones_check(
            lambda x: self.hermite_analyzer.hermite_poly(q, x), q, query.cfg.acf, n_list,
            spec.replicates, derive_seed(seed, HERMITE_STREAM), threads=self.threads,
        )
        path = CSVService.write_table(pd.DataFrame(report.to_rows()), Path(out_dir) / 'hermite_rates', fmt)
        return {
            'command': 'hermite',
            'path': path.name,
            'tau_ab': ranks.tau_ab,
            'tau_a': ranks.tau_a,
            'tau_star': ranks.tau_star,
            'degenerate': ranks.degenerate,
            'slope': report.slope,
            'expected_slope': report.expected_slope,
            'trend_ok': report.trend_ok,
        }

    # -------------------------------------------------- convolution check

    def run_convolution_check(self, out_dir: Path, fmt: str = 'csv',
                              alphas: Sequence[float] = CONVOLUTION_ALPHAS,
                              weights: Sequence[float] = CONVOLUTION_WEIGHTS,
                              t_grid: Optional[Sequence[float]] = None) -> Dict:
        """Convolution remainder against its envelope for Pareto tails."""
        t_values = np.logspace(1, 4, 13) if t_grid is None else np.asarray(t_grid, dtype=float)
        u1, u2 = weights
        rows = []
        verdicts = {}
        for alpha in alphas:
            report = TailService.convolution_tail_check(TailModel.pareto(alpha), u1, u2, t_values)
            for row in report.to_rows():
                row.update({'alpha': alpha, 'c_hat': report.c_hat, 'bounded': report.bounded})
                rows.append(row)
            verdicts[f"{alpha:g}"] = {'bounded': report.bounded, 'c_hat': report.c_hat,
                                      'decade_ratio': report.decade_ratio}
            logger.info(f"alpha={alpha:g}: C_hat={report.c_hat:.4g}, bounded={report.bounded}")
        frame = pd.DataFrame(rows, columns=['alpha', 't', 'lhs', 'envelope', 'ratio', 'c_hat', 'bounded'])
        path = CSVService.write_table(frame, Path(out_dir) / 'convolution_check', fmt)
        return {
            'command': 'check-appendix-a',
            'path': path.name,
            'all_bounded': all(v['bounded'] for v in verdicts.values()),
            'alphas': verdicts,
        }
