"""Numerical simulator of a hybrid optical-microwave Rydberg CZ gate."""

from .errors import (ConfigError, DegenerateChannelError, GridMismatchError, GridTooCoarseError,
                     HybridGateError, NumericalError, TruncationError, UndefinedPhaseError)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateChannelError",
    "GridMismatchError",
    "GridTooCoarseError",
    "HybridGateError",
    "NumericalError",
    "TruncationError",
    "UndefinedPhaseError",
]
