"""Exception hierarchy shared by every stage of the simulator."""


class HybridGateError(Exception):
    """Base class for all simulator errors."""


class GridMismatchError(HybridGateError, ValueError):
    """Two sampled objects live on different frequency grids."""


class GridTooCoarseError(HybridGateError, ValueError):
    """The frequency grid cannot resolve the requested pulse."""


class DegenerateChannelError(HybridGateError):
    """A channel absorbed the whole pulse, or a state vanished."""


class UndefinedPhaseError(HybridGateError):
    """The reflection coefficient is zero, so its phase is meaningless."""


class TruncationError(HybridGateError):
    """A Fock-space truncation holds too much population in its last level."""


class NumericalError(HybridGateError):
    """An integrator failed or produced non-finite values."""


class ConfigError(HybridGateError):
    """Invalid run configuration (parse or validation failure)."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
