"""Error types raised by the solver, the oracles and the file layer."""

from typing import Optional


class EhmecError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EhmecError, ValueError):
    """A physical quantity is outside its domain (negative bits or energy, zero gain)."""


class ShapeMismatchError(EhmecError, ValueError):
    """Array shapes disagree with the (K, N) dimensions of the instance."""


class InvalidDualError(EhmecError, ValueError):
    """A dual point has a NaN, a negative multiplier or a non-positive tail sum."""


class DimensionTooLargeError(EhmecError, ValueError):
    """The exhaustive grid oracle was asked for more decision pairs than it supports."""


class ConfigError(EhmecError, ValueError):
    """Settings, solver options or a sweep configuration are invalid."""


class InputError(EhmecError):
    """An input file could not be read, parsed or validated.

    Attributes:
        path: File the error was found in.
        line: 1-based line of the error when the parser reports one.
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = path or "<input>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")
