"""
tailcond - conditional extremes of heavy-tailed stochastic volatility series

Application factory plus the command-line entry point. Subcommands live in
routes/; results go to the output directory, a JSON summary to stdout, logs
and error payloads to stderr.

Usage:
    python app.py estimate --config data/experiments/box_ar1.toml --seed 7 --out output
"""

import argparse
import sys
from typing import Optional, Sequence

from config import get_config
from models.errors import InputError, TailcondError
from routes import register_routes
from routes.common import common_options
from services.csv_service import CSVService
from services.experiment_manager import ExperimentManager
from utils.logger import get_logger, setup_logger

logger = get_logger(__name__)


def create_app(config_class=None, threads: Optional[int] = None) -> ExperimentManager:
    """
    Application Factory Pattern.

    Args:
        config_class: Configuration class to use (defaults to environment-based)
        threads: Worker threads (defaults to the configuration's)

    Returns:
        Configured ExperimentManager
    """
    if config_class is None:
        config_class = get_config()
    manager = ExperimentManager(config_class, threads=threads)
    logger.debug(f"Application factory completed - {manager.threads} thread(s)")
    return manager


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='tailcond',
        description='Conditional extremograms of heavy-tailed stochastic volatility processes',
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)
    register_routes(subparsers, common_options())
    return parser


def _emit_error(error: TailcondError) -> int:
    sys.stderr.write(CSVService.dumps(error.to_dict()) + '\n')
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        Exit code: 0 ok, 2 input error, 3 config error, 4 numeric error
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    config_class = get_config()
    setup_logger('DEBUG' if args.verbose else config_class.LOG_LEVEL)

    try:
        manager = create_app(config_class, threads=args.threads)
        summary = args.handler(args, manager)
    except TailcondError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=args.verbose)
        return _emit_error(e)
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        return _emit_error(InputError(f"I/O error: {e}"))

    sys.stdout.write(CSVService.dumps(summary) + '\n')
    return 0


if __name__ == '__main__':
    sys.exit(main())
