# utils package

"""
Logging setup, console colors, run reports and the shared error hierarchy.
"""

from .errors import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataError,
    NumericalError,
    ParameterError,
    SegKCError,
    ShapeError,
    TrainingError,
)
from .logging import setup_logging
from .run_report import RunReport

__all__ = [
    'CheckpointError',
    'ConfigError',
    'ContractError',
    'DataError',
    'NumericalError',
    'ParameterError',
    'SegKCError',
    'ShapeError',
    'TrainingError',
    'setup_logging',
    'RunReport',
]
