"""
Exception hierarchy for polarfuse.

Library code raises these; only the command-line layer turns them into
exit codes (see ``src.constants``).
"""

from typing import Optional


class PolarFuseError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PolarFuseError, ValueError):
    """An argument lies outside the physical or mathematical domain."""


class DimensionMismatchError(PolarFuseError, ValueError):
    """Two rasters or tensors that must agree in shape do not."""


class DegenerateGeometryError(PolarFuseError, ValueError):
    """A geometric quantity is undefined (e.g. normal parallel to view)."""


class ConfigError(PolarFuseError, ValueError):
    """A configuration value is missing, unknown or invalid."""


class MissingCacheError(PolarFuseError, RuntimeError):
    """A backward pass was requested without its forward cache."""


class IncompleteParamsError(PolarFuseError, KeyError):
    """A parameter store lacks tensors the model configuration needs."""


class NumericFailureError(PolarFuseError, ArithmeticError):
    """A non-finite value appeared during computation."""

    def __init__(self, stage: str, message: str = "non-finite value"):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class CorruptFileError(PolarFuseError, ValueError):
    """A binary file could not be parsed.

    Args:
        path (str): The file being read.
        field (str): The header field (or ``payload``) that failed.
        detail (str, optional): Extra context.
    """

    def __init__(self, path: str, field: str, detail: Optional[str] = None):
        self.path = path
        self.field = field
        message = f"{path}: bad '{field}'"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
