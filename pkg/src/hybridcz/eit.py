"""EIT write/store/retrieve propagator for the single-photon optical qubit.

The propagator is solved in the spectral domain.  Every time-dependent
coefficient enters the transfer function only through four scalar time
integrals, so a storage cycle costs a handful of adaptive quadratures:

    chi(w) = exp(I_A - w^2 I_C)          I_A = int A dt,  I_C = int (1-eta)^2 C dt
    phi(w) = -w^3 I_D                    I_D = int (1-eta)^3 D dt
    delay  = int (1-eta) dt              (removed: co-moving frame)

Internally the time integrals run in microseconds to keep QUADPACK's
absolute tolerance meaningful.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.constants import k as K_BOLTZMANN
from scipy.special import expit

from .errors import DegenerateChannelError, NumericalError
from .spectral import FrequencyGrid, SampledMode, apply_pointwise, make_gaussian_mode

__all__ = [
    "ControlSchedule",
    "EitChannelParams",
    "StorageTransfer",
    "AdiabaticityWarning",
    "DopplerEstimate",
    "control_amplitude",
    "mixing_eta",
    "group_velocity",
    "abc_coefficients",
    "adiabaticity_diagnostics",
    "storage_transfer",
    "flat_storage_transfer",
    "apply_storage",
    "balance_losses",
    "doppler_dephasing",
]

TWO_PI = 2 * np.pi
US = 1e-6
#: Omega never drops below this fraction of Omega0
OMEGA_FLOOR = 1e-6
ADIABATIC_LIMIT = 0.1


class AdiabaticityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ControlSchedule:
    """Double-tanh control field ``Omega0 (2 + tanh[r(t - t_on)] - tanh[r(t - t_off)]) / 2``.

    All times in seconds, ``ramp_rate`` in 1/s, ``omega0`` in rad/s.
    """

    omega0: float = TWO_PI * 30e6
    ramp_rate: float = 20 / US
    t_off: float = 2 * US
    t_on: float = 18 * US
    total_time: float = 20 * US

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not self.ramp_rate > 0:
            raise ValueError("ramp_rate must be positive")
        if not (0 <= self.t_off < self.t_on < self.total_time):
            raise ValueError("need 0 <= t_off < t_on < total_time")

    @property
    def storage_time(self) -> float:
        return self.t_on - self.t_off


@dataclass(frozen=True)
class EitChannelParams:
    """One polarization channel of the storage medium (angular rates in rad/s)."""

    g: float
    n_atoms: float
    schedule: ControlSchedule = field(default_factory=ControlSchedule)
    gamma_ba: float = TWO_PI * 3e6
    gamma_bc: float = 0.0
    length: float = 0.4e-3
    label: str = ""

    def __post_init__(self):
        if not self.g ** 2 * self.n_atoms > 0:
            raise ValueError("g^2 N must be positive")
        if self.gamma_ba < 0 or self.gamma_bc < 0:
            raise ValueError("decay rates must be non-negative")
        if not self.length > 0:
            raise ValueError("medium length must be positive")

    @property
    def g2n(self) -> float:
        return self.g ** 2 * self.n_atoms


@dataclass(frozen=True, eq=False)
class StorageTransfer:
    """Spectral transfer of one complete write/store/retrieve cycle."""

    grid: FrequencyGrid
    chi: np.ndarray
    phi: np.ndarray
    c1o: float
    c2o: float
    integrals: dict = field(default_factory=dict)
    delay: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def efficiency(self) -> float:
        return self.c1o ** 2

    @property
    def transfer(self) -> np.ndarray:
        return self.chi * np.exp(1j * self.phi)


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _schedule_terms(t, s: ControlSchedule):
    """Omega/Omega0 and its first two derivatives, unclamped; ``t`` in seconds."""
    r = s.ramp_rate
    if isinstance(t, (float, int)):
        # scalar path: quadrature calls this tens of thousands of times
        pa = _logistic(2 * r * (float(t) - s.t_on))    # (1 + tanh a) / 2
        pb = _logistic(-2 * r * (float(t) - s.t_off))  # (1 - tanh b) / 2
    else:
        pa = expit(2 * r * (np.asarray(t) - s.t_on))
        pb = expit(-2 * r * (np.asarray(t) - s.t_off))
    da = 2 * r * pa * (1 - pa)
    db = -2 * r * pb * (1 - pb)
    dda = 4 * r ** 2 * pa * (1 - pa) * (1 - 2 * pa)
    ddb = 4 * r ** 2 * pb * (1 - pb) * (1 - 2 * pb)
    return pa + pb, da + db, dda + ddb


def _clamped(t, s: ControlSchedule):
    x, dx, ddx = _schedule_terms(t, s)
    if isinstance(x, float):
        if x < OMEGA_FLOOR:
            return s.omega0 * OMEGA_FLOOR, 0.0, 0.0
        return s.omega0 * x, s.omega0 * dx, s.omega0 * ddx
    low = x < OMEGA_FLOOR
    x = np.where(low, OMEGA_FLOOR, x)
    dx = np.where(low, 0.0, dx)
    ddx = np.where(low, 0.0, ddx)
    return s.omega0 * x, s.omega0 * dx, s.omega0 * ddx


def control_amplitude(t: float, s: ControlSchedule) -> tuple[float, float]:
    """Control Rabi frequency and its time derivative at time ``t`` (seconds)."""
    if not (0 <= t <= s.total_time):
        raise ValueError(f"t = {t} outside [0, {s.total_time}]")
    om, dom, _ = _clamped(t, s)
    return float(om), float(dom)


def mixing_eta(omega, g: float, n_atoms: float):
    """Dark-state mixing angle ``eta = g^2 N / (g^2 N + |Omega|^2)``."""
    g2n = g ** 2 * n_atoms
    om2 = np.abs(omega) ** 2
    if np.any(g2n + om2 <= 0):
        raise ValueError("g^2 N + |Omega|^2 must be positive")
    return g2n / (g2n + om2)


def group_velocity(omega, g: float, n_atoms: float):
    """Group velocity ``v = c (1 - eta)`` and group index ``n_g = 1 / (1 - eta)``."""
    from .spectral import C_LIGHT
    one_minus = np.abs(omega) ** 2 / (g ** 2 * n_atoms + np.abs(omega) ** 2)
    return C_LIGHT * one_minus, 1 / one_minus


def _coefficients(t, p: EitChannelParams):
    om, dom, _ = _clamped(t, p.schedule)
    om2 = om ** 2
    eta = p.g2n / (p.g2n + om2)
    one_minus = om2 / (p.g2n + om2)
    rate = dom / om
    a = eta * (rate - p.gamma_bc)
    d = eta / om2
    # real Omega: (1/Omega*) dOmega*/dt + (2/Omega) dOmega/dt = 3 dOmega/dt / Omega
    c = d * ((2 * p.gamma_bc + p.gamma_ba) - 6 * rate)
    return a, c, d, one_minus


def abc_coefficients(t: float, p: EitChannelParams) -> tuple[float, float, float]:
    """Gain ``A`` (1/s), diffusion ``C`` (s) and dispersion ``D`` (s^2) at time ``t``."""
    if not (0 <= t <= p.schedule.total_time):
        raise ValueError(f"t = {t} outside the schedule")
    a, c, d, _ = _coefficients(t, p)
    if not np.all(np.isfinite([a, c, d])):
        raise NumericalError(f"non-finite EIT coefficients at t = {t}")
    return float(a), float(c), float(d)


def adiabaticity_diagnostics(s: ControlSchedule, gamma_ba: float, n: int = 40001) -> dict:
    """Largest values over the cycle of the three adiabaticity ratios."""
    t = np.linspace(0, s.total_time, n)
    om, dom, ddom = _clamped(t, s)
    rate = np.abs(dom / om)
    return {
        "decay_ratio": float(np.max(rate * gamma_ba / om ** 2)),
        "rate_ratio": float(np.max(rate / om)),
        "curvature_ratio": float(np.max(np.abs(ddom / om) / om ** 2)),
    }


def _breakpoints(s: ControlSchedule) -> list[float]:
    """Interval edges in microseconds: ramp centres and floor crossings."""
    pts = {0.0, s.t_off, s.t_on, s.total_time}
    mid = 0.5 * (s.t_off + s.t_on)

    def excess(t):
        return _schedule_terms(t, s)[0] - OMEGA_FLOOR

    if excess(mid) < 0:
        pts.add(optimize.brentq(excess, s.t_off, mid, xtol=1e-18, rtol=1e-15))
        pts.add(optimize.brentq(excess, mid, s.t_on, xtol=1e-18, rtol=1e-15))
    return sorted(p / US for p in pts)


def _time_integral(fn, edges) -> float:
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _err = integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=400)
        total += val
    return total


def _cycle_integrals(p: EitChannelParams) -> dict:
    edges = _breakpoints(p.schedule)

    def part(idx, scale):
        def fn(u):
            a, c, d, om1 = _coefficients(u * US, p)
            return (a, om1 ** 2 * c, om1 ** 3 * d, om1)[idx] * scale
        return fn

    # integrands converted to microsecond units: A [1/us], C [us], D [us^2]
    i_a = _time_integral(part(0, US), edges)
    i_c = _time_integral(part(1, 1 / US), edges) * US ** 2
    i_d = _time_integral(part(2, 1 / US ** 2), edges) * US ** 3
    i_v = _time_integral(part(3, 1.0), edges) * US
    vals = {"I_A": i_a, "I_C": i_c, "I_D": i_d, "delay": i_v}
    if not all(np.isfinite(v) for v in vals.values()):
        raise NumericalError(f"non-finite storage integrals for channel {p.label!r}")
    return vals


def storage_transfer(grid: FrequencyGrid, p: EitChannelParams,
                     f_in: SampledMode | None = None, pulse_duration: float = 0.5 * US,
                     check_adiabatic: bool = True) -> StorageTransfer:
    """Attenuation and co-moving phase of a full storage cycle.

    ``c1o`` is evaluated for ``f_in``; when it is omitted a Gaussian of
    ``pulse_duration`` on ``grid`` is used.
    """
    diag = adiabaticity_diagnostics(p.schedule, p.gamma_ba)
    if check_adiabatic and max(diag.values()) > ADIABATIC_LIMIT:
        warnings.warn(
            f"control schedule of channel {p.label!r} violates adiabaticity "
            f"(max ratio {max(diag.values()):.3g} > {ADIABATIC_LIMIT})",
            AdiabaticityWarning, stacklevel=2)
    ints = _cycle_integrals(p)
    w = grid.omega - grid.center
    chi = np.exp(ints["I_A"] - w ** 2 * ints["I_C"])
    phi = -w ** 3 * ints["I_D"]
    if not (np.all(np.isfinite(chi)) and np.all(np.isfinite(phi))):
        raise NumericalError("non-finite storage transfer")
    if f_in is None:
        f_in = make_gaussian_mode(grid, pulse_duration)
    c1o_sq = float(np.sum(grid.weights * np.abs(f_in.amplitudes) ** 2 * chi ** 2))
    c1o_sq = min(c1o_sq / (f_in.norm ** 2), 1.0)
    c1o = float(np.sqrt(c1o_sq))
    return StorageTransfer(grid, chi, phi, c1o, float(np.sqrt(1.0 - c1o_sq)),
                           integrals=ints, delay=ints["delay"], diagnostics=diag)


def flat_storage_transfer(grid: FrequencyGrid, amplitude: float = 1.0) -> StorageTransfer:
    """Frequency-independent storage with constant attenuation ``amplitude``."""
    chi = np.full(grid.n_points, float(amplitude))
    return StorageTransfer(grid, chi, np.zeros(grid.n_points), float(amplitude),
                           float(np.sqrt(1 - amplitude ** 2)))


def apply_storage(f_in: SampledMode, st: StorageTransfer) -> tuple[SampledMode, SampledMode]:
    """Retrieved pulse, unnormalized and post-selected (normalized)."""
    out = apply_pointwise(f_in, st.transfer)
    if out.norm == 0:
        raise DegenerateChannelError("storage absorbed the entire pulse")
    return out, out.normalize()


def balance_losses(c1o_l: float, c1o_r: float) -> tuple[float, float]:
    """Extra attenuations that equalize both polarizations at ``min(c1o_l, c1o_r)``."""
    for v in (c1o_l, c1o_r):
        if v == 0:
            raise DegenerateChannelError("a polarization channel retrieves nothing; cannot balance")
        if not 0 < v <= 1:
            raise ValueError(f"retrieval amplitude must lie in (0, 1], got {v}")
    low = min(c1o_l, c1o_r)
    return low / c1o_l, low / c1o_r


@dataclass(frozen=True)
class DopplerEstimate:
    as_printed: float
    sqrt_reading: float
    note: str


def doppler_dephasing(temperature: float, k_ge: float, k_er1: float, mass: float) -> DopplerEstimate:
    """Thermal Doppler dephasing of the ground-Rydberg coherence.

    ``as_printed`` evaluates ``|k_ge - k_er1| k_B T / m`` literally (units of
    m/s^2 per metre, not a rate).  ``sqrt_reading`` evaluates
    ``|k_ge - k_er1| sqrt(k_B T / m)`` in rad/s, the dimensionally consistent form.
    """
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    dk = abs(k_ge - k_er1)
    thermal = K_BOLTZMANN * temperature / mass
    return DopplerEstimate(
        as_printed=dk * thermal,
        sqrt_reading=dk * np.sqrt(thermal),
        note="printed formula is not a rate; the sqrt reading gives rad/s",
    )
