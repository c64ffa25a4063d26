"""
Unit Tests for the regression fixture script

The script output is checked against closed forms and against a second run.
"""

import json

import numpy as np
import pytest

from models import TailModel
from scripts import generate_regression_fixtures
from services import TailService


@pytest.fixture(scope='module')
def reference_file(tmp_path_factory):
    out = tmp_path_factory.mktemp('fixtures')
    return generate_regression_fixtures.main([str(out)])


@pytest.fixture(scope='module')
def reference(reference_file):
    with open(reference_file, encoding='utf-8') as handle:
        return json.load(handle)


class TestReferenceValues:
    """Contents of reference_values.json."""

    def test_sections(self, reference):
        assert set(reference) == {'convolution', 'limits', 'cones'}

    def test_cone_closed_forms(self, reference):
        cones = reference['cones']
        assert cones['nu_box2_alpha2_u23'] == pytest.approx(36.0)
        assert cones['nu_sum2_alpha2_u23'] == pytest.approx(13.0)
        assert cones['nu_combined_alpha1_u123'] == pytest.approx(9.0)

    def test_convolution_entry(self, reference):
        conv = reference['convolution']
        pareto = TailModel.pareto(1.5)
        assert conv['remainder'] == pytest.approx(TailService.convolution_remainder(pareto, 2.0, 3.0, 100.0))
        scale = TailService.survival(pareto, 50.0) + TailService.survival(pareto, 100.0 / 3.0)
        assert conv['ratio'] == pytest.approx(abs(conv['remainder']) / scale)

    def test_psi_curve_is_a_distribution_function(self, reference):
        psi = np.asarray(reference['limits']['box1_ar1_exp_psi']['psi'])
        assert len(psi) == 4
        assert np.all(np.diff(psi) >= 0)
        assert psi.min() >= 0.0 and psi.max() <= 1.0

    def test_mu_c_box1_is_one(self, reference):
        """box:1 gives mu_C = E[sigma^alpha] / E[sigma^alpha] = 1 up to Monte Carlo error."""
        mu = reference['limits']['box1_ar1_exp_mu_c']
        assert mu['value'] == pytest.approx(1.0, rel=0.1)

    def test_rerun_is_byte_identical(self, reference_file, tmp_path):
        again = generate_regression_fixtures.main([str(tmp_path)])
        with open(reference_file, 'rb') as first, open(again, 'rb') as second:
            assert first.read() == second.read()
