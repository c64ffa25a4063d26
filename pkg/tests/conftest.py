"""
Pytest Configuration and Fixtures

Shared fixtures: small model configurations, hand-checkable series and
experiment files for the CLI tests.
"""

import os

import numpy as np
import pytest

os.environ.setdefault('TAILCOND_ENV', 'testing')


@pytest.fixture(scope='session')
def test_config():
    """Test configuration class."""
    from config import TestingConfig
    return TestingConfig


@pytest.fixture
def manager(test_config):
    """
    ExperimentManager built through the application factory, as the CLI does.
    """
    from app import create_app
    return create_app(test_config, threads=1)


@pytest.fixture
def small_series():
    """Y = (1, 5, 2, 7, 3), small enough to check estimators by hand."""
    return np.array([1.0, 5.0, 2.0, 7.0, 3.0])


@pytest.fixture
def pareto2():
    from models import TailModel
    return TailModel.pareto(2.0)


@pytest.fixture
def ar1_exp_config(pareto2):
    """Exp volatility over AR(1) with phi = 0.5, Pareto(2) innovations, box:1, lead 2."""
    from models import AcfModel, SvConfig, VolatilityFn
    return SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=pareto2, n=2000, m=2, h=1)


@pytest.fixture
def iid_config(pareto2):
    """Constant volatility over white noise: Y is i.i.d. Pareto(2)."""
    from models import AcfModel, SvConfig, VolatilityFn
    return SvConfig(acf=AcfModel.white_noise(), vol=VolatilityFn.const(1.0), tail=pareto2, n=2000, m=2, h=1)


EXPERIMENT_TOML = """\
name = "box-ar1"
replicates = 4
master_seed = 11
outputs = "output"

[process]
acf = "ar1"
phi = 0.5
vol = "exp"
tail = "pareto"
alpha = 2.0
n = 3000

[estimator]
set = "box:1"
m = 1
k_exponent = 0.6

[target]
kind = "cdf"
y_grid = [1.0, 2.0, 4.0, 8.0]
n_mc = 4000
"""


@pytest.fixture
def experiment_text():
    """TOML text of a small weak-dependence experiment."""
    return EXPERIMENT_TOML


@pytest.fixture
def experiment_file(tmp_path, experiment_text):
    path = tmp_path / 'experiment.toml'
    path.write_text(experiment_text, encoding='utf-8')
    return path


@pytest.fixture
def experiment_spec(experiment_text):
    from schemas import parse_experiment
    return parse_experiment(experiment_text)
