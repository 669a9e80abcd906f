"""
Exceptions raised by clipnoise.

Library code raises these; only the command line turns them into exit codes.
"""

from typing import Optional


class ClipNoiseError(Exception):
    """Base class for every clipnoise failure."""


class InputError(ClipNoiseError, ValueError):
    """
    A precondition on the arguments of an operation was violated.

    Attributes:
        field: Name of the offending argument, if known
    """

    def __init__(self, message: str = "", field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DegenerateInputError(InputError):
    """Sample data has zero variance where a spread is required."""


class ConfigError(InputError):
    """
    Invalid run configuration (flags or config file).

    Attributes:
        field: Name of the offending configuration key, if known
        line: 1-based line in the config file, if known
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}", field=field)


class DivergenceUndefinedError(ClipNoiseError, ArithmeticError):
    """KL divergence is undefined: the model density vanishes on a populated bin."""


class ConsistencyError(ClipNoiseError, RuntimeError):
    """An internal invariant failed (e.g. a Hermitian IFFT came out complex)."""
