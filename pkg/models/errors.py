"""
Error hierarchy and process exit codes.

Every failure the CLI can report derives from TailcondError and knows its
exit code: 2 for bad input data, 3 for bad configuration, 4 for numerical
failures.
"""
from typing import Any, Dict, Optional


class TailcondError(Exception):
    """Base class for all domain errors."""
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable payload for the CLI error JSON."""
        payload = {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
        }
        payload.update(self.details)
        return payload


class InputError(TailcondError, ValueError):
    """Unparseable or unreadable input data."""
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, **details: Any):
        if line is not None:
            details['line'] = line
        super().__init__(message, **details)
        self.line = line


class ConfigError(TailcondError, ValueError):
    """Invalid model, estimator or experiment configuration."""
    exit_code = 3


class DomainError(ConfigError):
    """Argument outside the mathematical domain (e.g. p not in (0, 1))."""


class AcfRangeError(ConfigError, IndexError):
    """Lag requested beyond the stored range of a custom ACF."""


class ShapeError(ConfigError):
    """Vector or matrix dimension does not match the set or model."""


class UnsupportedError(TailcondError, NotImplementedError):
    """Family or dimensionality outside what is implemented."""
    exit_code = 3


class NumericError(TailcondError, ArithmeticError):
    """Numerical failure (overflow, singular system, failed root search)."""
    exit_code = 4


class SpectralError(NumericError):
    """Covariance cannot be embedded / is not nonnegative-definite."""

    def __init__(self, message: str, eigenvalue: Optional[float] = None, **details: Any):
        if eigenvalue is not None:
            details['eigenvalue'] = float(eigenvalue)
        super().__init__(message, **details)
        self.eigenvalue = eigenvalue


class IntegrationError(NumericError):
    """Adaptive quadrature did not converge."""


class DegenerateSetError(NumericError):
    """Monte Carlo denominator is not positive."""


class InsufficientExceedancesError(NumericError):
    """Estimator selected no windows above the threshold."""

    def __init__(self, message: str, numerator: int = 0, denominator: int = 0, **details: Any):
        details.setdefault('numerator', int(numerator))
        details.setdefault('denominator', int(denominator))
        super().__init__(message, **details)
        self.numerator = int(numerator)
        self.denominator = int(denominator)
