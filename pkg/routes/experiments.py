"""
Experiment routes: replicated coverage studies and the conditional versus
unconditional distribution comparison.
"""
from routes.common import out_dir, require_spec, run_seed


def coverage(args, manager):
    spec = require_spec(args)
    return manager.run_coverage(spec, run_seed(args, spec), out_dir(args, spec), args.fmt)


def figure1(args, manager):
    spec = require_spec(args)
    return manager.run_figure1(spec, run_seed(args, spec), out_dir(args, spec), args.fmt)


def register(subparsers, parent):
    parser = subparsers.add_parser('coverage', parents=[parent], help='Monte Carlo coverage study')
    parser.set_defaults(handler=coverage)

    parser = subparsers.add_parser('figure1', parents=[parent],
                                   help='Conditional vs unconditional distribution, SV and i.i.d. (SVG)')
    parser.set_defaults(handler=figure1)
