"""Exception types shared across the package."""


class ChoquardError(Exception):
    """Base class for all package errors."""


class ParameterError(ChoquardError, ValueError):
    """Invalid problem parameters (N, mu, k, ...)."""


class DomainError(ChoquardError, ValueError):
    """Argument outside the domain of a special function or closed form."""


class DivergenceError(ChoquardError, ArithmeticError):
    """The requested integral does not converge."""


class BudgetExceededError(ChoquardError, RuntimeError):
    """Quadrature or sampling budget exhausted before reaching tolerance.

    The best available estimate is kept in ``partial`` (a QuadratureResult).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class HypothesisError(ChoquardError):
    """The potential does not satisfy the extremum hypothesis of the search."""


class ClassificationError(ChoquardError):
    """A critical point was found but its Hessian signature does not match."""


class NotInteriorError(HypothesisError):
    """The extremum of the search lies on the boundary of the admissible domain."""
