"""
Integration Tests for the command-line entry point

Each subcommand end to end: files written, JSON summary on stdout,
machine-readable errors on stderr with the documented exit codes.
"""

import json
import xml.etree.ElementTree as ET

import pytest

from app import main
from models import NumericError
from schemas import emit_experiment, load_experiment
from services.experiment_manager import ExperimentManager

pytestmark = pytest.mark.integration


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def _stderr_json(capsys):
    text = capsys.readouterr().err
    return json.loads(text[text.index('{\n'):])


@pytest.fixture
def series_file(tmp_path, small_series):
    path = tmp_path / 'series.csv'
    path.write_text('y\n' + '\n'.join(f"{v:g}" for v in small_series) + '\n', encoding='utf-8')
    return path


@pytest.fixture
def small_k_experiment(tmp_path):
    """No process: box:1, m = 1, k = 10 (more than a five-value series allows)."""
    path = tmp_path / 'small_k.toml'
    path.write_text('[estimator]\nset = "box:1"\nm = 1\nk = 10\n[target]\ny_grid = [4.0]\n', encoding='utf-8')
    return path


class TestSubcommands:
    """Successful runs."""

    def test_simulate(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['simulate', '--config', str(experiment_file), '--out', str(out), '--seed', '7']) == 0
        summary = _stdout_json(capsys)
        assert summary['n'] == 3000
        lines = (out / 'simulate.csv').read_text().splitlines()
        assert lines[0] == 't,y,x,z'
        assert len(lines) == 3001

    def test_estimate_on_simulated_path(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['estimate', '--config', str(experiment_file), '--out', str(out)]) == 0
        summary = _stdout_json(capsys)
        assert summary['k'] >= 1
        header = (out / 'estimate.csv').read_text().splitlines()[0]
        assert header == 'y,psi_hat,stderr,ci_lo,ci_hi,k,exceedances'

    def test_estimate_on_csv(self, tmp_path, capsys):
        config = tmp_path / 'csv.toml'
        config.write_text('[estimator]\nset = "box:1"\nm = 1\nk = 1\n[target]\ny_grid = [4.0]\n', encoding='utf-8')
        series = tmp_path / 'series.csv'
        series.write_text('y\n1\n5\n2\n7\n3\n', encoding='utf-8')
        out = tmp_path / 'out'
        code = main(['estimate', '--config', str(config), '--input', str(series), '--out', str(out),
                     '--format', 'json'])
        assert code == 0
        payload = json.loads((out / 'estimate.json').read_text())
        # n = 4 windows, u_hat = 5: only 7 exceeds and its successor 3 is <= 4
        assert payload['rows'][0]['psi_hat'] == 1.0
        assert payload['rows'][0]['exceedances'] == 1
        assert _stdout_json(capsys)['u_hat'] == 5.0

    def test_limit(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['limit', '--config', str(experiment_file), '--out', str(out)]) == 0
        summary = _stdout_json(capsys)
        assert summary['mu_c'] > 0
        lines = (out / 'limit.csv').read_text().splitlines()
        assert lines[0] == 'y,psi,stderr'
        assert len(lines) == 5
        levels = summary['variance_by_level']
        assert [entry['y'] for entry in levels] == [1.0, 2.0, 4.0, 8.0]
        assert all(entry['sigma2'] >= 0 for entry in levels)
        assert 'sigma2' not in summary

    def test_coverage(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['coverage', '--config', str(experiment_file), '--out', str(out), '--threads', '2']) == 0
        summary = _stdout_json(capsys)
        assert summary['replicates'] == 4
        assert (out / 'coverage.csv').exists()
        assert len((out / 'coverage_replicates.csv').read_text().splitlines()) == 1 + 4 * 4

    def test_figure1_svg(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['figure1', '--config', str(experiment_file), '--out', str(out)]) == 0
        summary = _stdout_json(capsys)
        assert summary['svg'] == 'figure1.svg'
        root = ET.parse(out / 'figure1.svg').getroot()
        assert root.tag.endswith('svg')
        assert (out / 'figure1_sv.csv').exists()
        assert (out / 'figure1_iid.csv').exists()
        assert json.loads((out / 'figure1_summary.json').read_text())['iid']['exceedances'] > 0

    def test_hermite(self, experiment_file, tmp_path, capsys):
        out = tmp_path / 'out'
        code = main(['hermite', '--config', str(experiment_file), '--out', str(out), '--n-list', '64', '256'])
        assert code == 0
        summary = _stdout_json(capsys)
        assert summary['tau_a'] == 1
        assert summary['expected_slope'] == -1.0
        assert len((out / 'hermite_rates.csv').read_text().splitlines()) == 3

    def test_convolution_check_without_config(self, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['check-appendix-a', '--out', str(out), '--alphas', '2.0']) == 0
        summary = _stdout_json(capsys)
        assert set(summary['alphas']) == {'2'}
        assert (out / 'convolution_check.csv').exists()


class TestDeterminism:
    """Outputs depend on the seed only."""

    def test_thread_count_does_not_change_bytes(self, experiment_file, tmp_path, capsys):
        one, four = tmp_path / 'one', tmp_path / 'four'
        assert main(['coverage', '--config', str(experiment_file), '--out', str(one), '--threads', '1']) == 0
        assert main(['coverage', '--config', str(experiment_file), '--out', str(four), '--threads', '4']) == 0
        for name in ('coverage.csv', 'coverage_replicates.csv'):
            assert (one / name).read_bytes() == (four / name).read_bytes()

    def test_same_seed_same_series(self, experiment_file, tmp_path, capsys):
        a, b = tmp_path / 'a', tmp_path / 'b'
        main(['simulate', '--config', str(experiment_file), '--out', str(a), '--seed', '0x2a'])
        main(['simulate', '--config', str(experiment_file), '--out', str(b), '--seed', '42'])
        assert (a / 'simulate.csv').read_bytes() == (b / 'simulate.csv').read_bytes()

    def test_config_round_trip_file(self, experiment_spec, tmp_path):
        path = tmp_path / 'emitted.toml'
        path.write_text(emit_experiment(experiment_spec), encoding='utf-8')
        assert load_experiment(path) == experiment_spec


class TestErrors:
    """Exit codes and error payloads."""

    def test_malformed_csv(self, small_k_experiment, tmp_path, capsys):
        bad = tmp_path / 'bad.csv'
        bad.write_text('y\n1.0\n2.0\nnot-a-number\n', encoding='utf-8')
        code = main(['estimate', '--config', str(small_k_experiment), '--input', str(bad), '--out', str(tmp_path)])
        assert code == 2
        payload = _stderr_json(capsys)
        assert payload['error'] == 'InputError'
        assert payload['line'] == 4

    def test_k_not_below_n(self, small_k_experiment, series_file, tmp_path, capsys):
        code = main(['estimate', '--config', str(small_k_experiment), '--input', str(series_file),
                     '--out', str(tmp_path)])
        assert code == 3
        assert _stderr_json(capsys)['exit_code'] == 3

    def test_missing_config(self, tmp_path, capsys):
        assert main(['limit', '--out', str(tmp_path)]) == 3
        assert _stderr_json(capsys)['error'] == 'ConfigError'

    def test_invalid_toml(self, tmp_path, capsys):
        config = tmp_path / 'broken.toml'
        config.write_text('[estimator\n', encoding='utf-8')
        assert main(['simulate', '--config', str(config), '--out', str(tmp_path)]) == 3

    def test_simulate_needs_process(self, small_k_experiment, tmp_path, capsys):
        assert main(['simulate', '--config', str(small_k_experiment), '--out', str(tmp_path)]) == 3

    def test_figure1_needs_cdf_target(self, tmp_path, capsys):
        config = tmp_path / 'event.toml'
        config.write_text(
            '[process]\nacf = "ar1"\nphi = 0.5\nalpha = 2.0\nn = 500\n'
            '[estimator]\nset = "box:1"\nm = 1\nk = 10\n'
            '[target]\nkind = "event"\nlower = [0.0]\nupper = [2.0]\n',
            encoding='utf-8',
        )
        assert main(['figure1', '--config', str(config), '--out', str(tmp_path)]) == 3

    def test_numeric_error_exit_code(self, experiment_file, tmp_path, capsys, monkeypatch):
        def failing(self, *args, **kwargs):
            raise NumericError("circulant embedding failed", min_eigenvalue=-0.1)
        monkeypatch.setattr(ExperimentManager, 'run_limit', failing)
        assert main(['limit', '--config', str(experiment_file), '--out', str(tmp_path)]) == 4
        payload = _stderr_json(capsys)
        assert payload['min_eigenvalue'] == -0.1

    def test_invalid_seed_is_usage_error(self, experiment_file):
        with pytest.raises(SystemExit) as exc_info:
            main(['simulate', '--config', str(experiment_file), '--seed', '-1'])
        assert exc_info.value.code == 2
