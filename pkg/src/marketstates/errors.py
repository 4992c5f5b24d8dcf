"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line driver can map
failures onto process exit statuses without inspecting messages.
"""


class MarketStatesError(Exception):
    exit_code = 1


class ValidationError(MarketStatesError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyOutputError(ValidationError):
    pass


class InsufficientUniverseError(ValidationError):
    pass


class EmptyRangeError(ValidationError):
    pass


class IncompatibleUniverseError(ValidationError):
    pass


class WindowTooLongError(ValidationError):
    pass


class MissingSectorError(ValidationError):
    pass


class NumericError(MarketStatesError, ArithmeticError):
    exit_code = 3


class DegenerateWindowError(NumericError):
    """Zero local variance inside a normalization window."""


class DegenerateSeriesError(NumericError):
    """A series is constant inside a correlation window."""

    def __init__(self, symbol, message=None):
        super().__init__(message or f"series {symbol!r} has zero variance in window")
        self.symbol = symbol


class NonConvergenceError(NumericError):
    def __init__(self, message, estimate, residual):
        super().__init__(f"{message} (estimate={estimate!r}, residual={residual!r})")
        self.estimate = estimate
        self.residual = residual


class RenderError(NumericError):
    pass


class StorageError(MarketStatesError, OSError):
    exit_code = 4
