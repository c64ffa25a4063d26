"""
Application configuration with environment-specific settings.

Usage:
    from config import get_config
    settings = get_config()
    n_mc = settings.N_MC
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory of the application
BASE_DIR = Path(__file__).parent.resolve()


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


class Config:
    """Base configuration with common settings."""

    # Logging
    LOG_LEVEL = os.environ.get('TAILCOND_LOG_LEVEL', 'INFO')

    # Execution
    DEFAULT_THREADS = _env_int('TAILCOND_THREADS', 1)
    MASTER_SEED = _env_int('TAILCOND_SEED', 20240917)

    # Path configuration
    OUTPUT_DIR = Path(os.environ.get('TAILCOND_OUTPUT_DIR', BASE_DIR / 'output'))

    # Monte Carlo draws for limit functionals when an experiment gives no n_mc
    N_MC = _env_int('TAILCOND_N_MC', 200_000)

    # Hermite quadrature
    HERMITE_NODES = 128
    HERMITE_ND_NODES = 48
    RANK_TOL = _env_float('TAILCOND_RANK_TOL', 1e-7)


class DevelopmentConfig(Config):
    """Desk-scale defaults for interactive runs."""

    LOG_LEVEL = os.environ.get('TAILCOND_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Full-size Monte Carlo runs."""

    N_MC = _env_int('TAILCOND_N_MC', 1_000_000)


class TestingConfig(Config):
    """Testing environment configuration."""

    LOG_LEVEL = 'WARNING'
    N_MC = 20_000


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(env_name=None):
    """
    Get configuration class for specified environment.

    Args:
        env_name (str): Environment name (development/production/testing)
                       If None, uses TAILCOND_ENV environment variable

    Returns:
        Config class for the specified environment
    """
    if env_name is None:
        env_name = os.environ.get('TAILCOND_ENV', 'development')

    return config.get(env_name, config['default'])
