"""Numerical toolkit for multi-bubble solutions of the critical Choquard equation."""

from .constants import (
    EnergyConstants,
    ProblemParams,
    alpha_coeff,
    b0_geometric,
    energy_constants,
    gamma_fn,
    hls_constant,
    i_alpha_m,
    radial_integral,
    riesz_factor,
)
from .errors import (
    BudgetExceededError,
    ChoquardError,
    ClassificationError,
    DivergenceError,
    DomainError,
    HypothesisError,
    NotInteriorError,
    ParameterError,
)

__version__ = "0.1.0"
SCHEMA_HEADER = "# choquard-bubbles v1"

__all__ = [
    "BudgetExceededError", "ChoquardError", "ClassificationError", "DivergenceError",
    "DomainError", "EnergyConstants", "HypothesisError", "NotInteriorError", "ParameterError",
    "ProblemParams", "SCHEMA_HEADER", "alpha_coeff", "b0_geometric", "energy_constants",
    "gamma_fn", "hls_constant", "i_alpha_m", "radial_integral", "riesz_factor",
]
