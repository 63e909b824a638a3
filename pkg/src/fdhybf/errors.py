"""Exception taxonomy shared across the package."""


class FdhybfError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FdhybfError, ValueError):
    """Malformed or inconsistent configuration input."""


class GeometryError(FdhybfError, ValueError):
    """Non-physical array geometry (e.g. negative squared distance)."""


class SingularMatrixError(FdhybfError, ValueError):
    """A matrix required to be (positive) definite is numerically singular."""


class CapacityError(FdhybfError, RuntimeError):
    """A dense subproblem exceeds the configured size cap."""


class BracketError(FdhybfError, RuntimeError):
    """A multiplier bisection failed to bracket a feasible point."""


class StaleBeamformerError(FdhybfError, RuntimeError):
    """Quadratic forms are far from diagonal: the beamformer passed in is not
    the current eigenvector solution (update-order bug in the caller)."""


class AlignmentError(FdhybfError, ValueError):
    """Result rows cannot be paired across schemes (seed/realization mismatch)."""
