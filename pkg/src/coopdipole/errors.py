"""Exception types shared across the package."""


class CoopDipoleError(Exception):
    """Base class for all package errors."""


class CoincidentPointError(CoopDipoleError):
    """An evaluation point fell within the hard floor of a source position."""


class SolverError(CoopDipoleError):
    """The linear solve failed (singular or ill-conditioned system)."""


class SolverConvergenceError(SolverError):
    """The iterative solver did not reach the requested residual.

    Carries the best residual achieved so the caller can decide whether to
    retry with a looser tolerance or more iterations.
    """

    def __init__(self, message, best_residual=None, iterations=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class ConfigError(CoopDipoleError):
    """A run configuration failed schema validation."""
