"""Boundary-crossing probabilities for uniform order statistics, and
counts of integers whose prime factors follow ``loglog`` boundaries."""

from .smirnov_core import (
    BoundaryQuery,
    LowerThresholdProfile,
    ProbabilityResult,
    q_exact,
    q_exact_general,
    q_reflect_upper,
    q_steck,
)
from .prime_engine import (
    CapacityError,
    CountQuery,
    CountTable,
    FactorProfile,
    count_constrained,
    count_corollary,
    pi_k_table,
    sieve_profiles,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryQuery",
    "LowerThresholdProfile",
    "ProbabilityResult",
    "q_exact",
    "q_exact_general",
    "q_reflect_upper",
    "q_steck",
    "CapacityError",
    "CountQuery",
    "CountTable",
    "FactorProfile",
    "count_constrained",
    "count_corollary",
    "pi_k_table",
    "sieve_profiles",
]
