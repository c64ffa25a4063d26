"""
Estimation routes.

``estimate`` runs the empirical estimator of the experiment's target on a
CSV series (one numeric column, optional header ``y``), or on a simulated
path when ``--input`` is omitted.
"""
from pathlib import Path

from routes.common import out_dir, require_spec, run_seed


def estimate(args, manager):
    spec = require_spec(args)
    return manager.run_estimate(spec, run_seed(args, spec), out_dir(args, spec), args.fmt,
                                input_path=args.input)


def register(subparsers, parent):
    parser = subparsers.add_parser('estimate', parents=[parent], help='Empirical conditional distribution')
    parser.add_argument('--input', type=Path, help='CSV series; simulate from [process] when omitted')
    parser.set_defaults(handler=estimate)
