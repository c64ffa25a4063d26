"""
Shared option handling for the subcommands.
"""
import argparse
from pathlib import Path

from models.errors import ConfigError
from schemas.experiment import ExperimentSpec, load_experiment

FORMATS = ('csv', 'json')


def seed_type(text: str) -> int:
    """argparse type for an unsigned 64-bit seed."""
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed '{text}'")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {value}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def common_options() -> argparse.ArgumentParser:
    """Parent parser carrying the flags every subcommand accepts."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--config', type=Path, help='TOML experiment file')
    parent.add_argument('--seed', type=seed_type, help='Master seed (overrides master_seed)')
    parent.add_argument('--threads', type=positive_int, help='Worker threads for replicate loops')
    parent.add_argument('--out', type=Path, help='Output directory (overrides outputs)')
    parent.add_argument('--format', choices=FORMATS, default='csv', dest='fmt', help='Table format')
    return parent


def require_spec(args) -> ExperimentSpec:
    if args.config is None:
        raise ConfigError(f"'{args.command}' needs --config")
    return load_experiment(args.config)


def run_seed(args, spec: ExperimentSpec) -> int:
    return args.seed if args.seed is not None else spec.master_seed


def out_dir(args, spec: ExperimentSpec = None, default: Path = None) -> Path:
    """--out, then the experiment's outputs, then the configured default."""
    if args.out is not None:
        return args.out
    if spec is not None:
        return Path(spec.outputs)
    return Path(default) if default is not None else Path('output')
