"""
Validation Schemas Package

Contains Pydantic models for TOML experiment files.
"""

from .experiment import ExperimentSpec, emit_experiment, load_experiment, parse_experiment

__all__ = ['ExperimentSpec', 'emit_experiment', 'load_experiment', 'parse_experiment']
