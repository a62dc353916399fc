"""
Exception hierarchy for the weighted model enumeration engine.
"""

from typing import Optional


class WmeError(Exception):
    """Base class for all engine errors."""


class InstanceFormatError(WmeError, ValueError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"Line {line_number}: {message}"
        super().__init__(message)


class InvalidWeight(InstanceFormatError):
    """A literal weight is not a strictly positive finite real."""


class DuplicateWeight(InstanceFormatError):
    """The same literal received two weight declarations."""


class IncompleteAssignment(WmeError, ValueError):
    """A model does not assign every variable of the instance."""


class OracleCapExceeded(WmeError, ValueError):
    """The brute-force oracle was asked to enumerate too many variables."""


class ContractViolation(WmeError, RuntimeError):
    """An operation was called outside its precondition."""
