"""Exception types shared across the package."""


class CoherenceError(Exception):
    """Base class for all package errors."""


class ArgumentError(CoherenceError, ValueError):
    """An argument lies outside the documented domain."""


class SizeLimitError(ArgumentError):
    """A register would exceed the configured maximum qubit count."""


class ValidationError(CoherenceError, ValueError):
    """A matrix or vector fails a physicality check."""


class StateFormatError(CoherenceError, ValueError):
    """A state file cannot be parsed."""


class ConditionError(CoherenceError):
    """The ordering conditions of the bound do not hold at the requested parameters."""

    def __init__(self, index: int, side: str, message: str):
        super().__init__(message)
        self.index = index
        self.side = side


class InfeasibleError(CoherenceError):
    """A requested coherence target chain cannot be realized by qubit pure states."""

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index
