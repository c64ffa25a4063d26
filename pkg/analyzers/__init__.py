"""
Analyzers Package

Contains Hermite-expansion diagnostics and coverage/normality summaries
for replicated estimation experiments.
"""

from .coverage_analyzer import CoverageAnalyzer, CoverageSummary
from .hermite_analyzer import HermiteAnalyzer, HermiteExpansion

__all__ = ['CoverageAnalyzer', 'CoverageSummary', 'HermiteAnalyzer', 'HermiteExpansion']
