"""
Theory routes: limit functionals, Hermite ranks and the convolution tail check.
"""
from routes.common import out_dir, positive_int, require_spec, run_seed


def limit(args, manager):
    spec = require_spec(args)
    return manager.run_limit(spec, run_seed(args, spec), out_dir(args, spec), args.fmt)


def hermite(args, manager):
    spec = require_spec(args)
    return manager.run_hermite(spec, run_seed(args, spec), out_dir(args, spec), args.fmt,
                               q=args.q, n_list=tuple(args.n_list))


def convolution_check(args, manager):
    spec = require_spec(args) if args.config is not None else None
    return manager.run_convolution_check(out_dir(args, spec, manager.config.OUTPUT_DIR), args.fmt,
                                         alphas=tuple(args.alphas))


def register(subparsers, parent):
    parser = subparsers.add_parser('limit', parents=[parent], help='Theoretical limit functional')
    parser.set_defaults(handler=limit)

    parser = subparsers.add_parser('hermite', parents=[parent], help='Hermite ranks and partial-sum variance rates')
    parser.add_argument('--q', type=positive_int, default=1, help='Hermite polynomial degree for the rate check')
    parser.add_argument('--n-list', type=positive_int, nargs='+', default=[256, 1024, 4096, 16384],
                        help='Series lengths for the rate check')
    parser.set_defaults(handler=hermite)

    parser = subparsers.add_parser('check-appendix-a', parents=[parent],
                                   help='Convolution remainder against its envelope (Pareto)')
    parser.add_argument('--alphas', type=float, nargs='+', default=[1.5, 2.0, 3.0], help='Tail indices')
    parser.set_defaults(handler=convolution_check)
