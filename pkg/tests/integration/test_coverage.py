"""
Integration Tests for replicated coverage studies

i.i.d. Pareto data with constant volatility: the limit is F_Z(y) exactly,
so the 95% intervals should cover close to nominally. The slow studies
below add overlapping sum windows, thinned blocks, the long-memory
regime and the SV versus i.i.d. comparison.
"""

import pandas as pd
import pytest

from app import create_app
from config import TestingConfig
from schemas import ExperimentSpec

pytestmark = [pytest.mark.integration, pytest.mark.slow]


@pytest.fixture
def iid_event_spec():
    return ExperimentSpec.model_validate({
        'name': 'iid-event',
        'replicates': 200,
        'master_seed': 3,
        'process': {'acf': 'white_noise', 'vol': 'const', 'tail': 'pareto', 'alpha': 2.0, 'n': 5000},
        'estimator': {'set': 'box:1', 'm': 1, 'k': 100},
        'target': {'kind': 'event', 'lower': [float('-inf')], 'upper': [2.0], 'n_mc': 2000},
    })


class TestIidCoverage:
    """Nominal coverage where the truth is known."""

    def test_event_coverage(self, iid_event_spec, tmp_path):
        manager = create_app(TestingConfig, threads=4)
        summary = manager.run_coverage(iid_event_spec, iid_event_spec.master_seed, tmp_path)
        assert summary['failed'] == 0

        table = pd.read_csv(tmp_path / 'coverage.csv')
        row = table.iloc[0]
        assert row['truth'] == pytest.approx(0.75)
        assert 0.88 <= row['coverage'] <= 0.99
        assert row['sd_error'] == pytest.approx(1.0, abs=0.2)
        assert abs(row['mean_error']) < 0.3

    def test_replicates_table(self, iid_event_spec, tmp_path):
        spec = iid_event_spec.model_copy(update={'replicates': 10})
        create_app(TestingConfig, threads=2).run_coverage(spec, 3, tmp_path, 'json')
        assert (tmp_path / 'coverage_replicates.json').exists()
        assert (tmp_path / 'coverage.json').exists()


def _study(spec, out_dir, threads=4):
    """Run a coverage study and return (summary, first coverage row)."""
    summary = create_app(TestingConfig, threads=threads).run_coverage(spec, spec.master_seed, out_dir)
    return summary, pd.read_csv(out_dir / 'coverage.csv').iloc[0]


@pytest.fixture
def sum_event_spec():
    """
    i.i.d. Pareto(2) through sum:2 windows, two target values three steps
    ahead. Neighbouring windows share a coordinate, so the variance carries
    the lag-one cross term; the truth is F_Z(2)^2 = 0.5625.
    """
    return ExperimentSpec.model_validate({
        'name': 'iid-sum-event',
        'replicates': 200,
        'master_seed': 5,
        'process': {'acf': 'white_noise', 'vol': 'const', 'tail': 'pareto', 'alpha': 2.0, 'n': 50000},
        'estimator': {'set': 'sum:2', 'm': 3, 'h_prime': 1, 'k': 100},
        'target': {'kind': 'event', 'lower': [float('-inf'), float('-inf')], 'upper': [2.0, 2.0], 'n_mc': 2000},
    })


class TestSumCoverage:
    """Overlapping sum windows with the model variance including cross terms."""

    def test_event_coverage_with_cross_terms(self, sum_event_spec, tmp_path):
        summary, row = _study(sum_event_spec, tmp_path)
        assert summary['failed'] == 0
        assert row['truth'] == pytest.approx(0.5625, abs=1e-6)
        assert 0.88 <= row['coverage'] <= 0.995
        assert row['sd_error'] == pytest.approx(1.0, abs=0.3)
        assert abs(row['mean_error']) < 0.3


class TestThinnedVariance:
    """Disjoint blocks: the binomial variance rho (1 - rho) / D is exact to first order."""

    def test_replicate_spread_matches_binomial_form(self, sum_event_spec, tmp_path):
        spec = sum_event_spec.model_copy(update={
            'replicates': 300,
            'estimator': sum_event_spec.estimator.model_copy(update={'thinned': True, 'model_norming': False}),
        })
        summary, _ = _study(spec, tmp_path)
        assert summary['failed'] == 0

        replicates = pd.read_csv(tmp_path / 'coverage_replicates.csv')
        empirical = replicates['value'].var(ddof=1)
        bridge = (replicates['stderr'] ** 2).mean()
        assert empirical == pytest.approx(bridge, rel=0.25)

        rho = 0.5625
        expected = rho * (1.0 - rho) * (1.0 / replicates['exceedances']).mean()
        assert empirical == pytest.approx(expected, rel=0.25)


@pytest.fixture
def fgn_event_spec():
    """Exp volatility over FGN(0.9), Hermite rank one; n = 10^5."""
    return ExperimentSpec.model_validate({
        'name': 'fgn-regimes',
        'replicates': 100,
        'master_seed': 9,
        'process': {'acf': 'fgn', 'hurst': 0.9, 'vol': 'exp', 'tail': 'pareto', 'alpha': 2.0, 'n': 100000},
        'estimator': {'set': 'box:1', 'm': 1, 'k_exponent': 0.3},
        'target': {'kind': 'event', 'lower': [float('-inf')], 'upper': [8.0], 'n_mc': 20000},
    })


class TestLongMemoryRegimes:
    """Few exceedances stay in the Gaussian regime; many let the latent long memory dominate."""

    def test_coverage_breaks_down_for_large_k(self, fgn_event_spec, tmp_path):
        small_summary, small = _study(fgn_event_spec, tmp_path / 'small')
        large_spec = fgn_event_spec.model_copy(update={
            'estimator': fgn_event_spec.estimator.model_copy(update={'k_exponent': 0.9}),
        })
        large_summary, large = _study(large_spec, tmp_path / 'large')

        assert small_summary['failed'] == 0
        assert large_summary['failed'] == 0
        assert large['coverage'] < 0.9
        assert small['coverage'] > large['coverage']
        assert large_summary['lrd_rate'] > 100 * small_summary['lrd_rate']


@pytest.fixture
def strong_dependence_spec():
    """Exp volatility over AR(1) with phi = 0.9: the volatility persists past an extreme."""
    return ExperimentSpec.model_validate({
        'name': 'figure-ar1',
        'master_seed': 21,
        'process': {'acf': 'ar1', 'phi': 0.9, 'vol': 'exp', 'tail': 'pareto', 'alpha': 2.0, 'n': 20000},
        'estimator': {'set': 'box:1', 'm': 1, 'k_exponent': 0.6},
        'target': {'kind': 'cdf', 'y_grid': [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]},
    })


class TestFigureComparison:
    """Conditional and unconditional laws part under SV and agree for i.i.d. data."""

    def test_sv_distance_dominates_iid(self, strong_dependence_spec, tmp_path):
        manager = create_app(TestingConfig, threads=4)
        summary = manager.run_figure1(strong_dependence_spec, strong_dependence_spec.master_seed, tmp_path)
        assert summary['distance_ratio'] >= 2.0
        assert summary['iid']['sup_distance'] <= 2.0 * summary['iid']['ks_critical']
        assert summary['sv']['sup_distance'] > summary['sv']['ks_critical']
