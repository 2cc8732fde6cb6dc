"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(ArithmeticError):
    """A numerical procedure failed (non-convergence, blow-up, ...)."""


class CausticError(NumericError):
    """The two-point boundary problem for the elementary functions is degenerate.

    Raised when the fundamental solution ``v2`` vanishes at the final time, so
    the boundary conditions ``u(0)``, ``u(t)`` cannot be imposed.
    """

    def __init__(self, message, t=None, nearest_zero=None):
        super().__init__(message)
        self.t = t
        self.nearest_zero = nearest_zero


class PhysicalityError(NumericError):
    """A covariance matrix violates the Robertson-Schroedinger bound."""
