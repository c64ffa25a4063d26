"""
Routes Package - Subcommand Registration

Each module registers its subcommands on the CLI's subparsers and binds a
handler ``handler(args, manager) -> summary dict``.
"""

from . import estimation, experiments, simulation, theory

ROUTE_MODULES = (simulation, estimation, theory, experiments)


def register_routes(subparsers, parent):
    """Register every subcommand in display order."""
    for module in ROUTE_MODULES:
        module.register(subparsers, parent)


__all__ = ['register_routes', 'ROUTE_MODULES']
