"""Shared exception hierarchy for the fuzzy covering location modules."""
from __future__ import annotations

from typing import Optional


class FuzzyCoverError(Exception):
    """Base class for all errors raised by the library."""


class OrderViolation(FuzzyCoverError, ValueError):
    """Raised when a triplet does not satisfy ``lo <= mid <= hi``."""


class DomainViolation(FuzzyCoverError, ValueError):
    """Raised when a parameter lies outside its admissible range."""


class NegativityViolation(FuzzyCoverError, ValueError):
    """Raised when an operation requiring nonnegative TFNs gets a negative one."""


class InstanceParseError(FuzzyCoverError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = "line {}: {}".format(line, message)
        super(InstanceParseError, self).__init__(message)
        self.line = line


class EmptyInstance(FuzzyCoverError):
    """Raised when an instance declares no demand points."""


class ModeMismatch(FuzzyCoverError):
    """Raised when a budget mode is incompatible with the facility costs."""


class UnknownFacility(FuzzyCoverError, KeyError):
    """Raised when a facility index does not exist in the problem."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class InfeasibleCandidate(FuzzyCoverError):
    """Raised when a candidate solution violates the budget rows."""


class EmptyWeightSet(FuzzyCoverError):
    """Raised when the weight loop is started without weight vectors."""


class TooLarge(FuzzyCoverError):
    """Raised when an exhaustive oracle is asked to enumerate too many subsets."""


__all__ = [
    "DomainViolation",
    "EmptyInstance",
    "EmptyWeightSet",
    "FuzzyCoverError",
    "InfeasibleCandidate",
    "InstanceParseError",
    "ModeMismatch",
    "NegativityViolation",
    "OrderViolation",
    "TooLarge",
    "UnknownFacility",
]
