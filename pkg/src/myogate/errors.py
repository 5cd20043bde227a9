"""Exception hierarchy shared across the package."""


class MyogateError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MyogateError):
    """A config value, shape pairing, or file layout is invalid (CLI exit 2)."""


class ArgumentError(MyogateError):
    """A runtime argument violates an operation's preconditions."""


class StateError(MyogateError):
    """An operation was called in the wrong order (e.g. backward before forward)."""


class DataError(MyogateError):
    """Dataset contents violate what the caller promised (labels, classes)."""


class ParseError(MyogateError):
    """A file failed to parse; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoAcceptedActions(MyogateError):
    """AER is undefined because the gate accepted nothing."""
