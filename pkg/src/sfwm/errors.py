"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class SfwmError(Exception):
    exit_code = 1


class DomainError(SfwmError, ValueError):
    """Argument outside the validity range of a formula."""

    exit_code = 2


class ConfigError(SfwmError, ValueError):
    exit_code = 2


class CapacityError(SfwmError):
    """Expected event count exceeds the configured memory cap."""

    exit_code = 2


class InfeasibleError(SfwmError):
    exit_code = 3


class InfeasibleGeometryError(InfeasibleError, ValueError):
    pass


class InconsistentMeasurementError(InfeasibleError):
    """Measured rates admit no non-negative noise budget."""


class NoiselessError(InfeasibleError, ZeroDivisionError):
    """Accidental coincidence rate is exactly zero (ideal, noiseless source)."""


class NoPeakError(InfeasibleError):
    pass


class ShapeError(SfwmError, ValueError):
    exit_code = 2


class ResolutionError(SfwmError, ValueError):
    exit_code = 2


class TruncationError(SfwmError, ValueError):
    exit_code = 2


class StreamFormatError(SfwmError):
    """Malformed timestamp stream. ``offset`` is the byte offset of the defect, if known."""

    exit_code = 4

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
