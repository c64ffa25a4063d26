"""
Logging Setup

Provides centralized logging configuration for the command-line tool.
Everything logs under the ``tailcond`` namespace; output goes to stderr so
result files and stdout stay deterministic.
"""

import logging
import sys

ROOT_LOGGER_NAME = 'tailcond'


def get_logger(name: str) -> logging.Logger:
    """Return a child of the package logger for a module name."""
    if name.startswith(ROOT_LOGGER_NAME):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def setup_logger(level='INFO', stream=None):
    """
    Configure logging for the application.

    Sets up:
    - Structured log format with timestamps
    - Console output (stderr by default)
    - Log level from configuration or --verbose

    Args:
        level: Level name or numeric level
        stream: Optional stream override (tests pass a StringIO)

    Returns:
        The configured package logger
    """
    logger = logging.getLogger(ROOT_LOGGER_NAME)

    # Re-running setup (tests, repeated main() calls) must not stack handlers
    for existing in list(logger.handlers):
        logger.removeHandler(existing)

    handler = logging.StreamHandler(stream or sys.stderr)

    # Create formatter with detailed structure
    formatter = logging.Formatter(
        '[%(asctime)s] %(levelname)s in %(module)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    logger.setLevel(level)

    # Prevent duplicate logs from propagating
    logger.propagate = False

    logger.debug(f"Logging configured - Level: {logging.getLevelName(logger.level)}")

    return logger
