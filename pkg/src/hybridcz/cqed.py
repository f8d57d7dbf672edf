"""Microwave cavity-QED reflection: linear transfer functions and a mean-field check.

The linear input-output map is ``b_out(w) = C1(w) b_in(w) + C2(w) n_in(w)``.
Both coefficients are evaluated after multiplying numerator and denominator
by ``(i w - gamma_s)``, which removes the pole at ``i w = gamma_s`` and makes
the ``gamma_s -> 0`` and ``kappa_s -> 0`` limits regular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.constants import epsilon_0, hbar
from scipy.interpolate import CubicSpline

from .errors import GridMismatchError, NumericalError, UndefinedPhaseError
from .spectral import FrequencyGrid, SampledMode, apply_pointwise, time_envelope

__all__ = [
    "CqedParams",
    "TransferPair",
    "MeanFieldTrajectory",
    "GmEstimate",
    "transfer_functions",
    "flat_transfer",
    "reflection_phase",
    "mode_overlap_lambda",
    "mean_field_simulate",
    "mean_field_window",
    "linear_output",
    "linearization_error_estimate",
    "derive_gm",
]

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class CqedParams:
    """Cavity and Rydberg-transition rates in rad/s."""

    g_m: float = TWO_PI * 2.723e6
    kappa: float = TWO_PI * 2.0e6
    kappa_s: float = TWO_PI * 2.0e3
    gamma_s: float = TWO_PI * 4.78e3
    occupied: bool = True

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.kappa_s < 0 or self.gamma_s < 0 or self.g_m < 0:
            raise ValueError("kappa_s, gamma_s and g_m must be non-negative")

    @property
    def effective_g(self) -> float:
        return self.g_m if self.occupied else 0.0

    @property
    def cooperativity(self) -> float:
        if self.gamma_s == 0:
            return np.inf
        return self.effective_g ** 2 / (self.kappa * self.gamma_s)

    @property
    def gamma_eff(self) -> float:
        g2 = self.effective_g ** 2
        if self.kappa_s == 0:
            return np.inf if g2 * self.gamma_s > 0 else self.gamma_s
        return float(np.sqrt(self.gamma_s ** 2 + 2 * g2 * self.gamma_s / self.kappa_s))

    def with_occupation(self, occupied: bool) -> "CqedParams":
        return CqedParams(self.g_m, self.kappa, self.kappa_s, self.gamma_s, occupied)


@dataclass(frozen=True, eq=False)
class TransferPair:
    grid: FrequencyGrid
    c1: np.ndarray
    c2: np.ndarray
    gamma_eff: float


def _coefficients(w, p: CqedParams):
    g2 = p.effective_g ** 2
    iw = 1j * np.asarray(w, dtype=float)
    if g2 == 0:
        # bare cavity: the common factor (i w - gamma_s) cancels exactly
        den = iw - 0.5 * (p.kappa + p.kappa_s)
        return (iw + 0.5 * (p.kappa - p.kappa_s)) / den, np.sqrt(p.kappa * p.kappa_s) / den + 0 * iw
    pole = iw - p.gamma_s
    base = iw * pole + g2
    num = base - 0.5 * (p.kappa_s - p.kappa) * pole
    den = base - 0.5 * (p.kappa_s + p.kappa) * pole
    # (i w - gamma_eff) sqrt(kappa kappa_s), finite as kappa_s -> 0
    noise = iw * np.sqrt(p.kappa * p.kappa_s) - np.sqrt(
        p.kappa * (p.gamma_s ** 2 * p.kappa_s + 2 * g2 * p.gamma_s))
    return num / den, noise / den


def transfer_functions(grid: FrequencyGrid, p: CqedParams) -> TransferPair:
    """Signal and noise reflection coefficients sampled on ``grid``.

    For ``kappa_s = 0`` the noise coefficient is its analytic limit, which is
    non-zero when an occupied atom decays (``gamma_s > 0``); ``gamma_eff`` is
    then reported as ``inf``.
    """
    c1, c2 = _coefficients(grid.omega - grid.center, p)
    return TransferPair(grid, c1, c2, p.gamma_eff)


def flat_transfer(grid: FrequencyGrid, value: complex) -> TransferPair:
    """Broadband limit: constant reflection ``value`` with no noise admixture."""
    c1 = np.full(grid.n_points, complex(value))
    c2 = np.sqrt(np.clip(1 - np.abs(c1) ** 2, 0, None)).astype(complex)
    return TransferPair(grid, c1, c2, np.inf)


def reflection_phase(p: CqedParams) -> float:
    """Principal-value phase of ``C1(0)`` in ``(-pi, pi]``."""
    c1, _ = _coefficients(0.0, p)
    if abs(c1) < 1e-14:
        raise UndefinedPhaseError("C1(0) = 0 (critical coupling): reflection phase undefined")
    phase = float(np.angle(c1))
    # a signed zero imaginary part must not push -1 to -pi
    return np.pi if phase <= -np.pi else phase


def mode_overlap_lambda(f_in: SampledMode, tp: TransferPair) -> complex:
    """``Lambda = int |f_in|^2 conj(C1) dw``; ``1 - Lambda`` is the mode distortion."""
    if f_in.grid != tp.grid:
        raise GridMismatchError("mode and transfer live on different grids")
    w = f_in.grid.weights
    return complex(np.sum(w * np.abs(f_in.amplitudes) ** 2 * np.conj(tp.c1)))


def linear_output(f_in: SampledMode, tp: TransferPair, t, alpha: complex = 1.0) -> np.ndarray:
    """Time-domain linear-theory output ``alpha * IFT[C1 f_in](t)``."""
    return alpha * time_envelope(apply_pointwise(f_in, tp.c1), t)


@dataclass(frozen=True, eq=False)
class MeanFieldTrajectory:
    times: np.ndarray
    a_c: np.ndarray
    sigma: np.ndarray
    sigma_z: np.ndarray
    b_in: np.ndarray
    b_out: np.ndarray


def mean_field_simulate(p: CqedParams, alpha_in: complex, f_in_time, t_span,
                        tol: float = 1e-9, t_eval=None, atol_scale: float | None = None
                        ) -> MeanFieldTrajectory:
    """Integrate the semiclassical cavity/atom equations with a dynamical ``sigma_z``.

    ``f_in_time(t)`` is the drive envelope; ``alpha_in * f_in_time(t)`` is the
    incoming field amplitude (sqrt of photon flux).  The atom starts in
    ``|r1>`` (``sigma_z = -1/2``).  The reflected field is
    ``b_out = b_in + sqrt(kappa) a_c``, the sign that reproduces ``C1``.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    g = p.effective_g
    half = 0.5 * (p.kappa + p.kappa_s)
    sk = np.sqrt(p.kappa)
    t0, t1 = map(float, t_span)
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 2001)
    t_eval = np.asarray(t_eval, dtype=float)

    if alpha_in == 0:
        z = np.zeros(t_eval.size, dtype=complex)
        return MeanFieldTrajectory(t_eval, z, z.copy(), np.full(t_eval.size, -0.5), z.copy(), z.copy())

    def rhs(t, y):
        a = y[0] + 1j * y[1]
        s = y[2] + 1j * y[3]
        sz = y[4]
        drive = alpha_in * f_in_time(t)
        ds = -p.gamma_s * s + 2j * g * sz * a
        da = -1j * g * s - half * a - sk * drive
        dsz = -2 * g * (s * np.conj(a)).imag
        return [da.real, da.imag, ds.real, ds.imag, dsz]

    if atol_scale is None:
        atol_scale = abs(alpha_in) * 1e-3
    atol = [tol * atol_scale] * 4 + [tol * 1e-3]
    sol = integrate.solve_ivp(rhs, (t0, t1), [0.0, 0.0, 0.0, 0.0, -0.5], method="DOP853",
                              rtol=tol, atol=atol, dense_output=True)
    if not sol.success:
        raise NumericalError(f"mean-field integration failed: {sol.message}")
    y = sol.sol(t_eval)
    if not np.all(np.isfinite(y)):
        raise NumericalError("mean-field state became non-finite")
    a = y[0] + 1j * y[1]
    s = y[2] + 1j * y[3]
    b_in = alpha_in * np.asarray(f_in_time(t_eval), dtype=complex)
    return MeanFieldTrajectory(t_eval, a, s, y[4], b_in, b_in + sk * a)


def _slowest_rate(p: CqedParams) -> float:
    half = 0.5 * (p.kappa + p.kappa_s)
    g = p.effective_g
    if g == 0:
        return half
    m = np.array([[-p.gamma_s, -1j * g], [-1j * g, -half]])
    return float(np.min(-np.linalg.eigvals(m).real))


def mean_field_window(p: CqedParams, duration: float, delay: float = 0.0,
                      tail_decays: float = 25.0, max_tail: float = 400e-6):
    """Start and end times that contain the pulse and the cavity ring-down."""
    tail = min(tail_decays / _slowest_rate(p), max_tail)
    return delay - 8 * duration, delay + 8 * duration + tail


def make_drive(f_in: SampledMode, t0: float, t1: float, n: int = 8001):
    """Cubic-spline time envelope of ``f_in`` over ``[t0, t1]``."""
    t = np.linspace(t0, t1, n)
    env = time_envelope(f_in, t)
    re = CubicSpline(t, env.real)
    im = CubicSpline(t, env.imag)

    def drive(tt):
        return re(tt) + 1j * im(tt)

    return drive


def linearization_error_estimate(p: CqedParams, alpha_in: float, exact: bool = False) -> float:
    """Leading-order drift rate of ``sigma_z`` under a steady drive ``alpha_in``.

    ``exact=False`` gives ``2 kappa gamma_s alpha^2 / g_m^2``; ``exact=True``
    keeps ``2 kappa g_m^2 gamma_s alpha^2 / (g_m^2 + kappa gamma_s / 2)^2``.
    """
    if not p.g_m > 0:
        raise ValueError("g_m must be positive")
    a2 = abs(alpha_in) ** 2
    if exact:
        return 2 * p.kappa * p.g_m ** 2 * p.gamma_s * a2 / (p.g_m ** 2 + p.kappa * p.gamma_s / 2) ** 2
    return 2 * p.kappa * p.gamma_s * a2 / p.g_m ** 2


@dataclass(frozen=True)
class GmEstimate:
    rabi: float
    divided_by_kappa: float
    note: str


def derive_gm(cavity_frequency: float, effective_volume: float, dipole_moment: float,
              mode_amplitude_u: float, kappa: float = TWO_PI * 2.0e6) -> GmEstimate:
    """Single-photon Rydberg-cavity coupling from the cavity geometry.

    ``rabi`` is ``sqrt(hbar w_c / (2 eps0 V_c)) p u / hbar`` in rad/s;
    ``divided_by_kappa`` additionally divides by ``kappa`` (dimensionless).
    """
    for name, v in (("cavity_frequency", cavity_frequency), ("effective_volume", effective_volume),
                    ("dipole_moment", dipole_moment), ("mode_amplitude_u", mode_amplitude_u)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    field = np.sqrt(hbar * cavity_frequency / (2 * epsilon_0 * effective_volume))
    g = field * dipole_moment / hbar * mode_amplitude_u
    return GmEstimate(rabi=float(g), divided_by_kappa=float(g / kappa),
                      note="trailing 1/kappa makes the printed expression dimensionless")
