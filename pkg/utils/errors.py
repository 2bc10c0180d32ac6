"""
Exception hierarchy shared by every package.

Each class carries the process exit code the CLI maps it to.
"""

from typing import Dict, Optional


class SegKCError(Exception):
    """Base class for all errors raised by this code base."""

    exit_code = 1


class ConfigError(SegKCError, ValueError):
    """Invalid or unknown configuration field, ratio or preset."""

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)


class DataError(SegKCError, ValueError):
    """Malformed or out-of-range data (labels, images, manifests)."""

    exit_code = 3


class CheckpointError(DataError):
    """Checkpoint missing, unreadable, of another format version, or shape-incompatible."""


class ShapeError(SegKCError, ValueError):
    """Dimension mismatch between operands."""

    exit_code = 2


class ParameterError(SegKCError, ValueError):
    """Out-of-range scalar parameter (temperature, stride, window...)."""

    exit_code = 2


class ContractError(SegKCError, RuntimeError):
    """A call violated an API precondition."""


class NumericalError(SegKCError, ArithmeticError):
    """An operation produced a NaN or an infinity."""

    exit_code = 4


class TrainingError(NumericalError):
    """Divergence during training.

    Attributes:
        iteration: Iteration at which the failure happened
        terms: Per-term loss values computed before the failure
    """

    def __init__(self, message: str, iteration: int, terms: Optional[Dict[str, float]] = None):
        self.iteration = iteration
        self.terms = dict(terms or {})
        dump = ", ".join(f"{name}={value!r}" for name, value in self.terms.items())
        text = f"iteration {iteration}: {message}"
        if dump:
            text += f" [{dump}]"
        super().__init__(text)
