"""Exception hierarchy shared by the numerical modules and the CLI."""

from typing import Optional


class VgError(Exception):
    """Base class for all errors raised by vg_equations."""

    exit_code = 3


class DomainError(VgError, ValueError):
    """Argument outside the domain of the requested operation."""

    exit_code = 2


class BoundaryError(DomainError):
    """Evaluation exactly on a boundary where the limit does not exist."""


class PreconditionError(DomainError):
    """A documented precondition of an equation check is violated."""


class DataError(VgError, ValueError):
    """Sample data that cannot be used (empty or non-finite)."""

    exit_code = 2


class RangeError(VgError, ArithmeticError):
    """Result not representable as a finite, non-zero double."""


class ConvergenceError(VgError, ArithmeticError):
    """An iterative method or quadrature did not reach its tolerance."""

    def __init__(self, message: str, estimate: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate


class IntegrabilityError(VgError):
    """A test function violates its declared decay bound."""
