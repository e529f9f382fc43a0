"""Exception types shared across the package."""


class ExdiffError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ExdiffError, ValueError):
    """Rejected input: non-finite samples, bad thresholds, malformed files."""


class DegenerateSignalError(ExdiffError, ValueError):
    """Signal carries no usable variation (constant or numerically constant)."""


class SimulationDivergedError(ExdiffError, RuntimeError):
    """A simulated trajectory left the representable range (blow-up)."""
