"""Quantum points of the CHSH scenario: values, realisations and extremality tests."""

from .core_model import (
    NonSignallingViolation,
    ProbabilityPoint,
    ProbabilityTable,
    Realization,
    point_from_realization,
    probabilities_from_point,
    sign_flip_symmetry,
)
from .polytopes import CHSH, Functional, FunctionalValues, local_value, nonsignalling_value

__all__ = [
    "CHSH",
    "Functional",
    "FunctionalValues",
    "NonSignallingViolation",
    "ProbabilityPoint",
    "ProbabilityTable",
    "Realization",
    "local_value",
    "nonsignalling_value",
    "point_from_realization",
    "probabilities_from_point",
    "sign_flip_symmetry",
]
