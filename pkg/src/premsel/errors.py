"""Shared exception types."""


class PremselError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PremselError):
    """Invalid configuration, detected before any computation starts."""


class FofSyntaxError(PremselError):
    """Positioned syntax error in formula input."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class CorpusError(PremselError):
    """Malformed corpus data: identifiers, dependencies, or chronology."""


class TrainingError(PremselError):
    """A ranker could not be trained on the given view."""
