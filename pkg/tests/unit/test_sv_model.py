"""
Unit Tests for SvModelService

Simulation of Y = sigma(X) Z and the sigma^alpha moments.
"""

import math

import numpy as np
import pytest

from models import AcfModel, ConfigError, SvConfig, TailModel, VolatilityFn
from services import SvModelService


class TestSimulation:
    """Path simulation."""

    def test_product_structure(self, ar1_exp_config):
        sample = SvModelService.simulate_sv(ar1_exp_config, 5)
        assert len(sample) == ar1_exp_config.n
        np.testing.assert_allclose(sample.y, np.exp(sample.x) * sample.z)

    def test_reproducible(self, ar1_exp_config):
        a = SvModelService.simulate_sv(ar1_exp_config, 5)
        b = SvModelService.simulate_sv(ar1_exp_config, 5)
        np.testing.assert_array_equal(a.y, b.y)

    def test_latent_and_innovations_use_separate_streams(self, ar1_exp_config, iid_config):
        """Changing the ACF leaves the innovations unchanged."""
        a = SvModelService.simulate_sv(ar1_exp_config, 5)
        b = SvModelService.simulate_sv(iid_config, 5)
        np.testing.assert_array_equal(a.z, b.z)

    def test_const_volatility_is_iid_innovation(self, iid_config):
        sample = SvModelService.simulate_sv(iid_config, 1)
        np.testing.assert_array_equal(sample.y, sample.z)

    def test_lead_must_exceed_window(self, pareto2):
        with pytest.raises(ConfigError):
            SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=pareto2, n=100, m=2, h=2)

    def test_length_must_cover_target(self, pareto2):
        with pytest.raises(ConfigError):
            SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=pareto2, n=3, m=3, h=1, h_prime=1)


class TestMoments:
    """E[sigma^alpha] and E[sigma^(2 alpha)]."""

    def test_exp_lognormal_moment(self):
        assert SvModelService.sigma_alpha_moment(VolatilityFn.exp(), 2.0) == pytest.approx(math.exp(2.0))
        assert SvModelService.sigma_alpha_moment(VolatilityFn.exp(), 2.0, order=2) == pytest.approx(math.exp(8.0))

    def test_const_moment(self):
        assert SvModelService.sigma_alpha_moment(VolatilityFn.const(2.0), 1.5) == pytest.approx(2.0 ** 1.5)

    def test_abs_power_quadrature(self):
        """E|X|^2 = 1 for the abs-power family with exponent 1 and alpha 2."""
        value = SvModelService.sigma_alpha_moment(VolatilityFn.abs_power(1.0), 2.0)
        assert value == pytest.approx(1.0, rel=1e-4)

    def test_divergent_moment(self):
        assert SvModelService.sigma_alpha_moment(VolatilityFn.exp(), 30.0, order=2) == math.inf

    def test_invalid_order(self):
        with pytest.raises(ConfigError):
            SvModelService.sigma_alpha_moment(VolatilityFn.exp(), 1.0, order=3)


class TestExtremalDependence:
    """Empirical diagnostics on simulated paths."""

    def test_dependence_ratio_above_one_for_sv(self, pareto2):
        """Volatility clustering: joint exceedances are more frequent than under independence."""
        cfg = SvConfig(acf=AcfModel.ar1(0.9), vol=VolatilityFn.exp(), tail=pareto2, n=200_000, m=2)
        y = SvModelService.simulate_sv(cfg, 21).y
        assert SvModelService.tail_dependence_ratio(y, 1, 0.99) > 1.5

    def test_overlap_probability_near_half_for_iid(self):
        cfg = SvConfig(acf=AcfModel.white_noise(), vol=VolatilityFn.const(), tail=TailModel.pareto(1.5),
                       n=400_000, m=2)
        y = SvModelService.simulate_sv(cfg, 2).y
        assert SvModelService.overlap_conditional_probability(y, 0.999) == pytest.approx(0.5, abs=0.1)
