"""Exception types shared across the package."""


class LedrError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(LedrError):
    pass


class NonFiniteError(LedrError):
    pass


class BasePointMismatchError(LedrError):
    pass


class DegeneratePlaneError(LedrError):
    pass


class InvalidParameterError(LedrError):
    pass


class ChartExitError(LedrError):
    """A trajectory left the valid band of its coordinate chart."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoOracleError(LedrError):
    pass


class AntipodalPointError(LedrError):
    pass


class BoundaryIndexError(LedrError, IndexError):
    pass


class GridMismatchError(LedrError):
    pass


class OutOfWindowError(LedrError):
    pass


class NoOscillationError(LedrError):
    pass


class DivergenceError(LedrError):
    """A recurrence exceeded the overflow guard.

    Carries the step index and the partial series computed so far, so
    callers can still report the divergent run.
    """

    def __init__(self, message, step, partial):
        super().__init__(message)
        self.step = step
        self.partial = partial


class ConfigError(LedrError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SchemaError(LedrError):
    """Malformed input file; carries row/column diagnostics."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
