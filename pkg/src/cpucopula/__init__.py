"""Partition-of-unity copulas with data-driven drivers, tail dependence and VaR aggregation."""

from cpucopula.batch import SampleBatch
from cpucopula.drivers import DriverSpec, RankData, empirical_correlations, ranks_from_data
from cpucopula.errors import (
    CopulaError,
    DegenerateColumnError,
    DomainError,
    EvaluationError,
    NotPSDError,
    ParseError,
    QuadratureError,
    SpecError,
)
from cpucopula.gamma_copula import GammaParams
from cpucopula.numerics import RandomSource
from cpucopula.power_copula import PowerParams
from cpucopula.simulation import simulate

__all__ = [
    "CopulaError", "DegenerateColumnError", "DomainError", "DriverSpec", "EvaluationError",
    "GammaParams", "NotPSDError", "ParseError", "PowerParams", "QuadratureError", "RandomSource",
    "RankData", "SampleBatch", "SpecError", "empirical_correlations", "ranks_from_data", "simulate",
]

__version__ = "0.1.0"
