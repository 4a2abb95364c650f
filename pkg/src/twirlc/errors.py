"""Exceptions shared across the package."""


class TwirlcError(Exception):
    """Base class for all package errors."""


class CircuitError(TwirlcError):
    """Malformed circuit: broken alternation, bad gate, bad qubit index."""


class ParseError(TwirlcError):
    """Syntax error in a circuit or config file."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ResourceCapError(TwirlcError):
    """Requested problem size exceeds what dense simulation supports."""


class ConfigError(TwirlcError):
    """Invalid experiment configuration."""
