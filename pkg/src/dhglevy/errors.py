"""Exception hierarchy shared by every module in the package."""


class DhgError(Exception):
    """Base class for all package errors."""


class PoleError(DhgError, ValueError):
    """A gamma function was evaluated at one of its poles."""


class DomainError(DhgError, ValueError):
    """An argument lies outside the region where the routine is valid."""


class ParameterError(DhgError, ValueError):
    """Model parameters violate the admissibility conditions of a routine."""


class ConvergenceError(DhgError, ArithmeticError):
    """A series or iterative scheme failed to reach its tolerance."""
