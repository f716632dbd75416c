"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(ValueError):
    """A quantity is requested outside the cone where it is defined."""


class ConvexityGateError(ValueError):
    """The domain boundary is not (m-1)-convex, so the Dirichlet problem has no admissible solution."""


class ConvergenceError(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConeExitError(ConvergenceError):
    """A Newton iterate left the admissible cone and damping could not recover it."""
