"""Noncommutative Ruelle transfer operators on subshifts of finite type."""

from .algebra import Algebra, LinearMap, PIVerdict
from .cylfun import CylinderFunction
from .errors import (CapacityError, DegenerateEigenvalueError, DisallowedWordError, DomainError,
                     EigensolverError, NCRuelleError, NormalizationError)
from .sft import TransitionMatrix

__version__ = "0.1.0"

__all__ = [
    "Algebra",
    "CapacityError",
    "CylinderFunction",
    "DegenerateEigenvalueError",
    "DisallowedWordError",
    "DomainError",
    "EigensolverError",
    "LinearMap",
    "NCRuelleError",
    "NormalizationError",
    "PIVerdict",
    "TransitionMatrix",
]
