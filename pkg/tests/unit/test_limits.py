"""
Unit Tests for LimitService

Monte Carlo limit functionals against closed forms and tensor
Gauss-Hermite quadrature.
"""

import math

import numpy as np
import pytest

from models import (
    AcfModel,
    ConfigError,
    ExtremeSet,
    IntervalBox,
    LimitQuery,
    SvConfig,
    TailModel,
    TargetKind,
    VolatilityFn,
)
from services import LimitService

N_MC = 40_000


def _config(acf, vol=None, h=1, m=2, h_prime=0, alpha=2.0, n=5000):
    return SvConfig(acf=acf, vol=vol or VolatilityFn.exp(), tail=TailModel.pareto(alpha),
                    n=n, m=m, h=h, h_prime=h_prime)


class TestPsiLimit:
    """Psi(y) curves."""

    def test_matches_quadrature_box1(self):
        """Box h = 1: Psi(y) = E[e^(2 X_1) F(y e^-X_2)] / E[e^(2 X_1)]."""
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, (1.0, 2.0, 5.0), n_mc=N_MC, seed=1)
        curve = LimitService.mc_psi_limit(query)
        exact = LimitService.quadrature_psi_limit(query)
        for raw, se, value in zip(curve.raw_values, curve.stderr, exact):
            assert raw == pytest.approx(value, abs=3.5 * se + 1e-9)

    def test_matches_quadrature_box2(self):
        cfg = _config(AcfModel.fgn(0.75), h=2, m=3)
        query = LimitQuery(cfg, ExtremeSet.box(2), TargetKind.CDF_CURVE, (1.5, 4.0), n_mc=N_MC, seed=2)
        curve = LimitService.mc_psi_limit(query)
        exact = LimitService.quadrature_psi_limit(query, n_nodes=40)
        for raw, se, value in zip(curve.raw_values, curve.stderr, exact):
            assert raw == pytest.approx(value, abs=3.5 * se + 1e-9)

    def test_iid_limit_is_marginal(self):
        """Const volatility over white noise: Psi = F_Z exactly."""
        cfg = _config(AcfModel.white_noise(), vol=VolatilityFn.const())
        grid = (1.0, 2.0, 4.0)
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, grid, n_mc=1000, seed=0)
        curve = LimitService.mc_psi_limit(query)
        np.testing.assert_allclose(curve.values, [0.0, 0.75, 0.9375])

    def test_monotone_and_bounded(self):
        cfg = _config(AcfModel.fgn(0.8), h=2, m=3)
        grid = tuple(np.linspace(0.5, 30.0, 25))
        query = LimitQuery(cfg, ExtremeSet.sum_half_space(2), TargetKind.CDF_CURVE, grid, n_mc=5000, seed=4)
        values = LimitService.mc_psi_limit(query).values
        assert np.all(np.diff(values) >= 0)
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_sum_cdf_target(self):
        """With h' = 0 the target sum is the single target value."""
        cfg = _config(AcfModel.ar1(0.5))
        grid = (2.0, 6.0)
        cdf = LimitService.mc_psi_limit(LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, grid, n_mc=3000, seed=5))
        total = LimitService.mc_psi_limit(LimitQuery(cfg, ExtremeSet.box(1), TargetKind.SUM_CDF, grid, n_mc=3000, seed=5))
        np.testing.assert_allclose(cdf.raw_values, total.raw_values)

    def test_curve_frame_columns(self):
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, (1.0, 2.0), n_mc=500, seed=0)
        assert list(LimitService.mc_psi_limit(query).to_frame().columns) == ['y', 'psi', 'stderr']

    def test_event_query_rejected(self):
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.EVENT, box=IntervalBox.cdf([1.0]), n_mc=100)
        with pytest.raises(ConfigError):
            LimitService.mc_psi_limit(query)


class TestRhoLimit:
    """rho(A, B, m) for interval boxes."""

    def test_full_space_is_one(self):
        cfg = _config(AcfModel.fgn(0.75), h=2, m=3, h_prime=1)
        query = LimitQuery(cfg, ExtremeSet.sum_half_space(2), TargetKind.EVENT,
                           box=IntervalBox.full(2), n_mc=2000, seed=3)
        assert LimitService.mc_rho_limit(query).value == pytest.approx(1.0, abs=1e-12)

    def test_matches_quadrature(self):
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.EVENT,
                           box=IntervalBox((1.5,), (6.0,)), n_mc=N_MC, seed=8)
        rho = LimitService.mc_rho_limit(query)
        assert rho.within(LimitService.quadrature_rho_limit(query), n_stderr=3.5)

    def test_scale_invariance(self):
        """sigma -> c sigma together with B -> c B leaves rho unchanged."""
        c = 2.0
        box = IntervalBox((1.5,), (6.0,))
        base = LimitQuery(_config(AcfModel.ar1(0.5)), ExtremeSet.box(1), TargetKind.EVENT,
                          box=box, n_mc=N_MC, seed=9)
        scaled = LimitQuery(_config(AcfModel.ar1(0.5), vol=VolatilityFn.exp(c)), ExtremeSet.box(1),
                            TargetKind.EVENT, box=box.scaled(c), n_mc=N_MC, seed=9)
        # common random numbers: identical up to rounding
        assert LimitService.mc_rho_limit(scaled).value == pytest.approx(LimitService.mc_rho_limit(base).value, rel=1e-9)


class TestNormingConstants:
    """mu_C and the tail-dependence constant."""

    def test_mu_c_box2_lognormal(self):
        """Exp volatility, AR(1) 0.5, alpha 1, box:2: mu_C = e^gamma_1."""
        mu = LimitService.mu_C(ExtremeSet.box(2), VolatilityFn.exp(), AcfModel.ar1(0.5), 1.0, N_MC, 4)
        assert mu.within(math.exp(0.5), n_stderr=3.5)

    def test_mu_c_const_volatility(self):
        mu = LimitService.mu_C(ExtremeSet.sum_half_space(2), VolatilityFn.const(), AcfModel.white_noise(), 2.0, 100, 0)
        assert mu.value == pytest.approx(2.0)

    def test_mu_c_infinite_moment(self):
        with pytest.raises(ConfigError):
            LimitService.mu_C(ExtremeSet.box(1), VolatilityFn.exp(), AcfModel.ar1(0.5), 30.0, 100, 0)

    def test_box_norming_constant(self):
        value = LimitService.box_norming_constant(VolatilityFn.const(), AcfModel.white_noise(), 2.0, 2, 100, 0)
        assert value == pytest.approx(1.0)

    def test_tail_dependence_constant(self):
        """c = exp(alpha^2 gamma_m) for Exp volatility."""
        c = LimitService.tail_dep_constant(VolatilityFn.exp(), AcfModel.ar1(0.5), 1.0, 1, N_MC, 6)
        assert c.within(math.exp(0.5), n_stderr=3.5)


class TestAsymptoticVariance:
    """Limiting variance of the estimator."""

    def test_box_is_binomial(self):
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.EVENT, box=IntervalBox.cdf([2.0]), n_mc=5000, seed=1)
        report = LimitService.asymptotic_variance(query)
        assert report.cross_terms == []
        assert report.sigma2 == pytest.approx(report.rho * (1 - report.rho))

    @pytest.mark.parametrize('h_prime', [0, 1])
    def test_sum_const_volatility_matches_covariance_formula(self, h_prime):
        """
        sum:2 with constant sigma and B = (-inf, 2]^d, d = h' + 1, F = F_Z(2):
        rho = F^d and the lag-one target blocks jointly cover d + 1 coordinates,
        so R(A,B)/R(A,R) = F^(d+1) and sigma2 = F^d + F^(d+1) - 2 F^(2d).
        """
        cfg = _config(AcfModel.white_noise(), vol=VolatilityFn.const(), h=2, m=3, h_prime=h_prime)
        d = h_prime + 1
        f = 0.75  # Pareto(2) cdf at 2
        query = LimitQuery(cfg, ExtremeSet.sum_half_space(2), TargetKind.EVENT,
                           box=IntervalBox.cdf([2.0] * d), n_mc=2000, seed=2)
        report = LimitService.asymptotic_variance(query)
        assert report.rho == pytest.approx(f ** d)
        assert len(report.cross_terms) == 1
        r_ab, r_abr, r_ar = report.cross_terms[0]
        assert r_ab / r_ar == pytest.approx(f ** (d + 1))
        assert r_abr / r_ar == pytest.approx(f ** d)
        assert report.sigma2 == pytest.approx(f ** d + f ** (d + 1) - 2 * f ** (2 * d))

    def test_variance_per_grid_level(self, iid_config):
        """i.i.d. box:1 curve: sigma2(y) = F(y) (1 - F(y)) at every level."""
        query = LimitQuery(iid_config, ExtremeSet.box(1), TargetKind.CDF_CURVE, (2.0, 4.0), n_mc=500, seed=1)
        levels = LimitService.asymptotic_variance_curve(query)
        assert [y for y, _ in levels] == [2.0, 4.0]
        for (y, report), f in zip(levels, (0.75, 0.9375)):
            assert report.rho == pytest.approx(f)
            assert report.sigma2 == pytest.approx(f * (1 - f))

    def test_variance_per_level_needs_cdf_target(self, iid_config):
        query = LimitQuery(iid_config, ExtremeSet.box(1), TargetKind.EVENT, box=IntervalBox.cdf([2.0]), n_mc=100)
        with pytest.raises(ConfigError):
            LimitService.asymptotic_variance_curve(query)

    def test_overlapping_blocks_intersect_intervals(self):
        """Blocks (0, 3] and (1, 2] at lag 1 share one coordinate, which must lie in (1, 2]."""
        sigma = np.ones((4, 3))
        box = IntervalBox((0.0, 1.0), (3.0, 2.0))
        prob = LimitService.overlapping_box_probability(TailModel.pareto(2.0), sigma, box, lag=1)
        # F(3) - F(0), then (1, 2] meets (0, 3] in the middle, then (1, 2]
        expected = (1 - 1 / 9) * 0.75 * 0.75
        np.testing.assert_allclose(prob, expected)

    def test_disjoint_overlap_has_zero_probability(self):
        sigma = np.ones((2, 3))
        box = IntervalBox((0.0, 2.0), (1.0, 3.0))
        prob = LimitService.overlapping_box_probability(TailModel.pareto(2.0), sigma, box, lag=1)
        np.testing.assert_array_equal(prob, [0.0, 0.0])

    def test_sum_pair_covariance_on_diagonal(self):
        """h' = 0: both covariance forms reduce to F - F^2 at y = y'."""
        cfg = _config(AcfModel.white_noise(), vol=VolatilityFn.const(), h=2, m=3)
        y = 2.0
        f = 0.75
        expected = f - f * f
        curve_query = LimitQuery(cfg, ExtremeSet.sum_half_space(2), TargetKind.CDF_CURVE, (y,), n_mc=2000, seed=2)
        cov = LimitService.sum_pair_covariance(curve_query, y, y)
        assert cov.symmetric == pytest.approx(expected)
        assert cov.repeated == pytest.approx(expected)

    def test_pair_covariance_forms_differ_off_diagonal(self):
        cfg = _config(AcfModel.ar1(0.5), h=2, m=3)
        query = LimitQuery(cfg, ExtremeSet.sum_half_space(2), TargetKind.CDF_CURVE, (1.0,), n_mc=5000, seed=3)
        cov = LimitService.sum_pair_covariance(query, 1.5, 4.0)
        assert cov.symmetric != pytest.approx(cov.repeated)

    def test_plug_in(self):
        report = LimitService.plug_in_variance(ExtremeSet.box(2), 0.3, mu_c=2.0)
        assert report.sigma2 == pytest.approx(0.21)
        assert report.norming(1000, 100) == pytest.approx(math.sqrt(1000 * 0.01 * 2.0))

    def test_sum_cross_limit_at_origin(self):
        u = np.array([1.0, 2.0])
        v = np.array([3.0, 1.0])
        assert LimitService.sum_cross_limit(2.0, u, v) == pytest.approx(4.0)


class TestBiasRate:
    """v_n(A) and the diagnostics."""

    def test_pareto_const_is_exact(self):
        """i.i.d. Pareto, box:1: P(Y > u_n s) / F(u_n) = s^-alpha exactly, so v_n = 0."""
        cfg = _config(AcfModel.white_noise(), vol=VolatilityFn.const())
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, (1.0,), n_mc=500, seed=1)
        result = LimitService.bias_rate_vn(query, k=100, n=10_000)
        assert result.value == pytest.approx(0.0, abs=1e-8)
        assert result.u_n == pytest.approx(10.0, rel=1e-8)

    def test_student_t_rate_decreases(self):
        cfg = SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=TailModel.student_t(3.0), n=5000, m=2)
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, (1.0,), n_mc=4000, seed=3)
        coarse = LimitService.bias_rate_vn(query, k=100, n=1000)
        fine = LimitService.bias_rate_vn(query, k=100, n=100_000)
        assert fine.u_n > coarse.u_n
        assert fine.value < coarse.value

    def test_invalid_k(self):
        cfg = _config(AcfModel.ar1(0.5))
        query = LimitQuery(cfg, ExtremeSet.box(1), TargetKind.CDF_CURVE, (1.0,), n_mc=100)
        with pytest.raises(ConfigError):
            LimitService.bias_rate_vn(query, k=10, n=10)

    def test_lrd_rate_statistic(self):
        box = ExtremeSet.box(1)
        assert LimitService.lrd_rate_statistic(box, AcfModel.white_noise(), 1000, 100) == 0.0
        short = LimitService.lrd_rate_statistic(box, AcfModel.fgn(0.9), 10_000, 100)
        long = LimitService.lrd_rate_statistic(box, AcfModel.fgn(0.9), 10_000, 5000)
        assert long > short > 0
