"""Exception types raised across the package."""


class ThinTubeError(Exception):
    """Base class for all package errors."""


class DomainError(ThinTubeError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DegenerateTubeError(ThinTubeError, ValueError):
    """The tube map degenerates: h_eps <= 0 somewhere (eps too large)."""


class UnsupportedGeometryError(ThinTubeError, TypeError):
    """The requested operation is not available for this geometry kind."""


class ShiftRetryError(ThinTubeError, RuntimeError):
    """No admissible spectral shift could be factorized."""


class ConvergenceError(ThinTubeError, RuntimeError):
    """Iterative eigensolver did not converge; ``partial`` holds what was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DimensionCapError(ThinTubeError, ValueError):
    """Dense reference solve refused because the problem is too large."""


class ConfigError(ThinTubeError, ValueError):
    """Invalid sweep configuration."""
