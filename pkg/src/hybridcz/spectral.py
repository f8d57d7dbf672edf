"""Uniform frequency grids, sampled mode functions and quadrature.

All modes are stored as functions of angular detuning ``omega`` from the
carrier.  The wavenumber used by the optical propagator is ``k = omega / c``;
every ``k**n c**n`` product is therefore evaluated as ``omega**n``.

Fourier convention: a time envelope is ``f(t) = (2 pi)^-1/2 * int f(w) exp(-i w t) dw``,
so a spectral phase ``exp(+i w tau)`` delays the pulse by ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_LIGHT  # noqa: F401  (re-exported)

from .errors import GridMismatchError, GridTooCoarseError

__all__ = [
    "C_LIGHT",
    "FrequencyGrid",
    "SampledMode",
    "default_grid",
    "make_gaussian_mode",
    "inner_product",
    "norm",
    "apply_pointwise",
    "time_envelope",
    "check_resolves",
]

#: span / bandwidth and point count used when no grid is given explicitly
DEFAULT_SPAN_FACTOR = 16.0
DEFAULT_N_POINTS = 2049


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid ``center + linspace(-span/2, span/2, n)``."""

    center: float
    span: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (np.isfinite(self.span) and self.span > 0):
            raise ValueError(f"span must be positive, got {self.span}")

    @property
    def spacing(self) -> float:
        return self.span / (self.n_points - 1)

    @property
    def omega(self) -> np.ndarray:
        return self.center + np.linspace(-self.span / 2, self.span / 2, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; ``sum(weights * g)`` integrates ``g`` over the grid."""
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = self.spacing / 2
        return w

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        return FrequencyGrid(self.center, self.span, (self.n_points - 1) * factor + 1)


def default_grid(duration: float, span_factor: float = DEFAULT_SPAN_FACTOR,
                 n_points: int = DEFAULT_N_POINTS) -> FrequencyGrid:
    """Grid centred on the carrier spanning ``span_factor`` pulse bandwidths (2 pi / duration)."""
    return FrequencyGrid(0.0, span_factor * 2 * np.pi / duration, n_points)


def check_resolves(grid: FrequencyGrid, bandwidth: float) -> None:
    """Raise unless ``span >= 8 * bandwidth`` and ``spacing <= bandwidth / 16``."""
    if grid.span < 8 * bandwidth:
        raise GridTooCoarseError(
            f"grid span {grid.span:.4g} rad/s is below 8x the pulse bandwidth {bandwidth:.4g} rad/s")
    if grid.spacing > bandwidth / 16:
        raise GridTooCoarseError(
            f"grid spacing {grid.spacing:.4g} rad/s exceeds bandwidth/16 = {bandwidth / 16:.4g} rad/s")


@dataclass(frozen=True, eq=False)
class SampledMode:
    """Complex mode function sampled on ``grid``."""

    grid: FrequencyGrid
    amplitudes: np.ndarray
    normalized: bool = field(default=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return norm(self)

    def normalize(self) -> "SampledMode":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize a zero mode")
        return SampledMode(self.grid, self.amplitudes / n, normalized=True)

    def scaled(self, factor: complex) -> "SampledMode":
        return SampledMode(self.grid, self.amplitudes * factor)


def _same_grid(a: FrequencyGrid, b: FrequencyGrid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def make_gaussian_mode(grid: FrequencyGrid, duration: float, delay: float = 0.0) -> SampledMode:
    """Normalized spectrum of a Gaussian pulse.

    ``duration`` is the 1/e^2 intensity half-width in time, i.e. the pulse
    intensity is ``exp(-2 t^2 / duration^2)`` (Gaussian-beam ``w`` convention).
    The spectral amplitude is then ``exp(-w^2 duration^2 / 4)`` times the
    delay phase ``exp(i w delay)``.
    """
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    check_resolves(grid, 2 * np.pi / duration)
    w = grid.omega
    amps = np.exp(-((w - grid.center) * duration) ** 2 / 4) * np.exp(1j * w * delay)
    if delay == 0.0:
        amps = amps.real.astype(complex)
    return SampledMode(grid, amps).normalize()


def inner_product(f: SampledMode, g: SampledMode) -> complex:
    """Trapezoidal ``int conj(f) g dw``."""
    _same_grid(f.grid, g.grid)
    return complex(np.sum(f.grid.weights * np.conj(f.amplitudes) * g.amplitudes))


def norm(f: SampledMode) -> float:
    return float(np.sqrt(np.sum(f.grid.weights * np.abs(f.amplitudes) ** 2)))


def apply_pointwise(f: SampledMode, h) -> SampledMode:
    """Multiply ``f`` by a sampled function ``h`` (array or SampledMode); no renormalization."""
    if isinstance(h, SampledMode):
        _same_grid(f.grid, h.grid)
        h = h.amplitudes
    h = np.asarray(h, dtype=complex)
    if h.shape != f.amplitudes.shape:
        raise GridMismatchError(f"transfer has shape {h.shape}, mode has {f.amplitudes.shape}")
    return SampledMode(f.grid, f.amplitudes * h)


def time_envelope(f: SampledMode, t) -> np.ndarray:
    """Time-domain envelope of ``f`` at times ``t`` (direct quadrature, not FFT)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w = f.grid.omega - f.grid.center
    weighted = f.grid.weights * f.amplitudes
    out = np.empty(t.shape, dtype=complex)
    # chunked to bound the size of the phase matrix
    for start in range(0, t.size, 512):
        chunk = t[start:start + 512]
        out[start:start + 512] = np.exp(-1j * np.outer(chunk, w)) @ weighted
    return out / np.sqrt(2 * np.pi)
