#!/usr/bin/env python3
"""
Generate deterministic reference values for regression checks.

Usage:
    python scripts/generate_regression_fixtures.py [output_dir]

Writes <output_dir>/reference_values.json, by default under
TAILCOND_OUTPUT_DIR/fixtures.
"""

import sys
import os

# Add project root to path for imports
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from config import Config
from models import AcfModel, ExtremeSet, IntervalBox, LimitQuery, SvConfig, TailModel, TargetKind, VolatilityFn
from services import ConeService, CSVService, LimitService, TailService

Y_GRID = (1.0, 2.0, 4.0, 8.0)


def convolution_fixture():
    """Remainder of 2 Z1 + 3 Z2 at t = 100 relative to F(t/2) + F(t/3), Pareto(1.5)."""
    pareto = TailModel.pareto(1.5)
    t, u1, u2 = 100.0, 2.0, 3.0
    remainder = TailService.convolution_remainder(pareto, u1, u2, t)
    scale = TailService.survival(pareto, t / u1) + TailService.survival(pareto, t / u2)
    return {'alpha': 1.5, 'u': [u1, u2], 't': t, 'remainder': remainder, 'ratio': abs(remainder) / scale}


def limit_fixtures():
    pareto = TailModel.pareto(2.0)
    ar1_exp = SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=pareto, n=1000, m=2)
    box1 = LimitQuery(ar1_exp, ExtremeSet.box(1), TargetKind.CDF_CURVE, y_grid=Y_GRID)
    sum2_cfg = SvConfig(acf=AcfModel.ar1(0.5), vol=VolatilityFn.exp(), tail=pareto, n=1000, m=3, h=2)
    sum2 = LimitQuery(sum2_cfg, ExtremeSet.sum_half_space(2), TargetKind.EVENT, box=IntervalBox.cdf([2.0]))
    mu_c = LimitService.mu_C(ExtremeSet.box(1), ar1_exp.vol, ar1_exp.acf, 2.0, Config.N_MC, Config.MASTER_SEED)
    return {
        'box1_ar1_exp_psi': {
            'y_grid': list(Y_GRID),
            'psi': LimitService.quadrature_psi_limit(box1).tolist(),
        },
        'sum2_ar1_exp_rho_at_2': LimitService.quadrature_rho_limit(sum2),
        'box1_ar1_exp_mu_c': {'value': mu_c.value, 'stderr': mu_c.stderr, 'n_mc': Config.N_MC,
                              'seed': Config.MASTER_SEED},
    }


def cone_fixtures():
    return {
        'nu_box2_alpha2_u23': ConeService.nu_eval(ExtremeSet.box(2), 2.0, [2.0, 3.0]),
        'nu_sum2_alpha2_u23': ConeService.nu_eval(ExtremeSet.sum_half_space(2), 2.0, [2.0, 3.0]),
        'nu_combined_alpha1_u123': ConeService.nu_eval(ExtremeSet.combined(), 1.0, [1.0, 2.0, 3.0]),
    }


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    output_dir = argv[0] if argv else os.path.join(str(Config.OUTPUT_DIR), 'fixtures')
    output_file = os.path.join(output_dir, 'reference_values.json')

    print("Computing convolution remainder...")
    payload = {'convolution': convolution_fixture()}
    print("Computing limit functionals...")
    payload['limits'] = limit_fixtures()
    print("Computing cone measures...")
    payload['cones'] = cone_fixtures()

    CSVService.write_json(payload, output_file)

    # Print summary
    print(f"\n{'='*60}")
    print("REGRESSION FIXTURES COMPLETE")
    print(f"{'='*60}")
    print(f"Convolution ratio (Pareto 1.5, u=(2,3), t=100): {payload['convolution']['ratio']:.6g}")
    print(f"Box:1 psi on {list(Y_GRID)}: {payload['limits']['box1_ar1_exp_psi']['psi']}")
    print(f"\nOutput: {output_file}")
    print(f"{'='*60}\n")
    return output_file


if __name__ == '__main__':
    main()
