"""
Models package for tailcond.

Domain types for latent Gaussian processes, innovation laws, volatility
functions, extreme sets and estimator results.
"""
from .processes import AcfFamily, AcfModel, GaussianPath
from .tails import TailFamily, TailModel
from .volatility import VolatilityFamily, VolatilityFn, SvConfig
from .cones import ConeIndex, SetFamily, ExtremeSet
from .estimates import (
    IntervalBox,
    TargetKind,
    LimitQuery,
    MonteCarloValue,
    LimitCurve,
    VarianceReport,
    EstimatorConfig,
    Estimate,
    EstimateCurve,
)
from .errors import (
    TailcondError,
    InputError,
    ConfigError,
    DomainError,
    AcfRangeError,
    ShapeError,
    UnsupportedError,
    NumericError,
    SpectralError,
    IntegrationError,
    DegenerateSetError,
    InsufficientExceedancesError,
)

__all__ = [
    'AcfFamily',
    'AcfModel',
    'GaussianPath',
    'TailFamily',
    'TailModel',
    'VolatilityFamily',
    'VolatilityFn',
    'SvConfig',
    'ConeIndex',
    'SetFamily',
    'ExtremeSet',
    'IntervalBox',
    'TargetKind',
    'LimitQuery',
    'MonteCarloValue',
    'LimitCurve',
    'VarianceReport',
    'EstimatorConfig',
    'Estimate',
    'EstimateCurve',
    'TailcondError',
    'InputError',
    'ConfigError',
    'DomainError',
    'AcfRangeError',
    'ShapeError',
    'UnsupportedError',
    'NumericError',
    'SpectralError',
    'IntegrationError',
    'DegenerateSetError',
    'InsufficientExceedancesError',
]
