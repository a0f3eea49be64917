"""Exception hierarchy shared across the package."""


class SpinsightError(Exception):
    """Base class for all package errors."""


class LatticeError(SpinsightError):
    """Invalid lattice geometry (e.g. periodic extent below 3)."""


class ConfigError(SpinsightError):
    """Invalid or inconsistent experiment configuration."""


class ConvergenceError(SpinsightError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None, best_energy=None):
        super().__init__(message)
        self.residual = residual
        self.best_energy = best_energy


class DataError(SpinsightError):
    """Dataset file missing, corrupt, or of an unsupported version."""
