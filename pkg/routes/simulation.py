"""
Simulation routes.

``simulate`` writes one path (t, y, x, z) of the experiment's process.
"""
from routes.common import out_dir, require_spec, run_seed


def simulate(args, manager):
    spec = require_spec(args)
    return manager.run_simulate(spec, run_seed(args, spec), out_dir(args, spec), args.fmt)


def register(subparsers, parent):
    parser = subparsers.add_parser('simulate', parents=[parent], help='Simulate the stochastic volatility process')
    parser.set_defaults(handler=simulate)
