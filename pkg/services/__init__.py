"""
Services Package - Computation Layer

Service classes for simulation, tail computations, limit functionals and
estimation, keeping the CLI routes thin.
"""

from .gaussian_simulation_service import GaussianSimulationService
from .tail_service import TailService
from .sv_model_service import SvModelService
from .cone_service import ConeService
from .limit_service import LimitService
from .estimator_service import EstimatorService
from .csv_service import CSVService

__all__ = [
    'GaussianSimulationService',
    'TailService',
    'SvModelService',
    'ConeService',
    'LimitService',
    'EstimatorService',
    'CSVService',
]
