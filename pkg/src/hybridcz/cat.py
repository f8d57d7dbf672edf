"""Coherent-state and cat-state algebra plus a truncated-Fock oracle.

Multimode quantities act on *discrete amplitude vectors*: a mode sampled on
a grid with quadrature weights ``w`` is represented by ``x_k = f(w_k) sqrt(w_k)``
so that every overlap integral becomes a plain sum.

The oracle never uses the closed-form coherent overlap.  Each mode is a
beam splitter acting on a truncated Fock vector, ``a^dag -> C1 a^dag + C2 e^dag``
with ``e`` a fresh environment mode, and all inner products are evaluated
level by level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import DegenerateChannelError, GridMismatchError, TruncationError
from .spectral import SampledMode

__all__ = [
    "CatState",
    "FockVector",
    "OracleResult",
    "coherent_overlap",
    "multimode_overlap",
    "cat_normalization",
    "printed_cat_normalization",
    "environment_overlap",
    "printed_environment_overlap",
    "coherent_fock",
    "beam_splitter_lift",
    "fock_oracle_fidelity",
    "DEFAULT_TRUNCATION",
    "TAIL_TOLERANCE",
]

DEFAULT_TRUNCATION = 40
TAIL_TOLERANCE = 1e-12
MAX_ORACLE_MODES = 64


def coherent_overlap(a: complex, b: complex) -> complex:
    """``<a|b>`` for single-mode coherent states."""
    return complex(np.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + np.conj(a) * b))


def multimode_overlap(u, v) -> complex:
    """``<u|v>`` for multimode coherent states with discrete amplitude vectors."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise GridMismatchError(f"amplitude vectors differ in shape: {u.shape} vs {v.shape}")
    return complex(np.exp(-0.5 * np.vdot(u, u).real - 0.5 * np.vdot(v, v).real + np.vdot(u, v)))


def _check_parity(parity: int) -> None:
    if parity not in (1, -1):
        raise ValueError(f"parity must be +1 or -1, got {parity}")


def cat_normalization(alpha: complex, parity: int) -> float:
    """Normalization of ``|alpha> + parity |-alpha>``: ``1/sqrt(2(1 + parity e^{-2|alpha|^2}))``."""
    _check_parity(parity)
    a2 = abs(alpha) ** 2
    if parity == 1:
        return float(1 / np.sqrt(2 * (1 + np.exp(-2 * a2))))
    if a2 == 0:
        raise DegenerateChannelError("odd cat state with alpha = 0 is the zero vector")
    return float(1 / np.sqrt(-2 * np.expm1(-2 * a2)))


def printed_cat_normalization(alpha: complex, parity: int) -> float:
    """The alternative factor ``1/sqrt(2 + parity e^{-2|alpha|^2})``; does not normalize."""
    _check_parity(parity)
    return float(1 / np.sqrt(2 + parity * np.exp(-2 * abs(alpha) ** 2)))


@dataclass(frozen=True, eq=False)
class CatState:
    """``N (|alpha> + parity |-alpha>)`` carried by ``mode``."""

    alpha: complex
    parity: int
    mode: SampledMode | None = None

    def __post_init__(self):
        cat_normalization(self.alpha, self.parity)

    @property
    def normalization(self) -> float:
        return cat_normalization(self.alpha, self.parity)

    def branches(self) -> list[tuple[int, float]]:
        """``(sign, weight)`` of the two coherent components."""
        n = self.normalization
        return [(1, n), (-1, self.parity * n)]


def _column(c2, f_in: SampledMode) -> np.ndarray:
    grid = getattr(c2, "grid", None)
    if grid is not None:
        if grid != f_in.grid:
            raise GridMismatchError("transfer and mode live on different grids")
        c2 = c2.c2
    c2 = np.asarray(c2, dtype=complex)
    if c2.shape != f_in.amplitudes.shape:
        raise GridMismatchError(f"transfer has shape {c2.shape}, mode has {f_in.amplitudes.shape}")
    return c2


def environment_overlap(alpha: complex, sign_i: int, sign_j: int, f_in: SampledMode,
                        c2_i, c2_j) -> complex:
    """``<E_i|E_j>`` for environment branches with amplitudes ``sign alpha f_in C2``.

    ``c2_i`` and ``c2_j`` are arrays on ``f_in.grid`` or objects with ``grid``
    and ``c2`` attributes (a ``TransferPair``).  For opposite signs in one
    channel this is ``exp(-2 alpha^2 int |f_in C2|^2)``.
    """
    root_w = np.sqrt(f_in.grid.weights)
    base = alpha * f_in.amplitudes * root_w
    u = sign_i * base * _column(c2_i, f_in)
    v = sign_j * base * _column(c2_j, f_in)
    return multimode_overlap(u, v)


def printed_environment_overlap(alpha: complex, f_in: SampledMode, c2_i, c2_j) -> complex:
    """Opposite-sign overlap in the form ``exp(-alpha^2 int |f_in|^2 conj(C2_j) C2_i)``.

    Kept for comparison only: for ``i = j`` its exponent is half the
    multimode coherent-overlap value.
    """
    w = f_in.grid.weights
    k = np.sum(w * np.abs(f_in.amplitudes) ** 2 * np.conj(_column(c2_j, f_in)) * _column(c2_i, f_in))
    return complex(np.exp(-abs(alpha) ** 2 * k))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated single-mode state on levels ``0..truncation``."""

    truncation: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.truncation + 1,):
            raise ValueError(f"expected {self.truncation + 1} amplitudes, got {amps.shape}")
        if abs(amps[-1]) ** 2 >= TAIL_TOLERANCE:
            raise TruncationError(
                f"tail mass {abs(amps[-1]) ** 2:.3g} at level {self.truncation} "
                f"exceeds {TAIL_TOLERANCE:g}; raise the truncation")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def coherent_fock(alpha: complex, truncation: int = DEFAULT_TRUNCATION) -> FockVector:
    """Fock amplitudes ``e^{-|alpha|^2/2} alpha^n / sqrt(n!)`` up to ``truncation``."""
    amps = np.empty(truncation + 1, dtype=complex)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, truncation + 1):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    return FockVector(truncation, amps)


def beam_splitter_lift(vec: FockVector, c1: complex, c2: complex) -> np.ndarray:
    """Joint (signal, environment) amplitudes after ``a^dag -> c1 a^dag + c2 e^dag``.

    The environment starts in vacuum, so ``|m>|0>`` maps to
    ``sum_j sqrt(C(m, j)) c1^j c2^(m-j) |j, m-j>``.  Returns an
    ``(N+1, N+1)`` array indexed ``[signal, environment]``.
    """
    n = vec.truncation
    j = np.arange(n + 1)[:, None]
    l = np.arange(n + 1)[None, :]
    m = j + l
    keep = m <= n
    amps = np.zeros((n + 1, n + 1), dtype=complex)
    src = np.where(keep, m, 0)
    coeff = np.sqrt(comb(m, j)) * np.power(complex(c1), j) * np.power(complex(c2), l)
    amps[keep] = (vec.amplitudes[src] * coeff)[keep]
    return amps


@dataclass(frozen=True)
class OracleResult:
    fidelity: float
    probability: float
    mw_norm: float


def fock_oracle_fidelity(weights, mode, optical_out, mw_c1, mw_c2, alpha: float,
                         ideal_signs=(1, -1), truncation: int = DEFAULT_TRUNCATION,
                         ideal_weights=None) -> OracleResult:
    """Post-selected gate fidelity by explicit Fock-space construction.

    Parameters
    ----------
    weights : (2, 2) array
        Branch amplitudes ``w[i, s]``; ``i`` indexes the optical polarization
        (0 = L, 1 = R), ``s`` the coherent component (0 = ``+alpha``, 1 = ``-alpha``).
    mode : (M,) array
        Discrete input mode amplitudes, ``sum |x|^2 = 1``.
    optical_out : (2, M) array
        Single-photon amplitudes that survive the optical stage, per polarization.
    mw_c1, mw_c2 : (2, M) arrays
        Per-mode signal and noise transfer of the microwave stage per branch.
    alpha : float
        Coherent amplitude.
    ideal_signs : pair of ints
        Ideal reflection sign per polarization.
    ideal_weights : (2, 2) array, optional
        Weights of the ideal state; defaults to ``weights``.

    Returns
    -------
    OracleResult
        Fidelity of the post-selected, environment-traced output with the
        ideal state, the post-selection probability and the norm of the
        microwave-plus-environment output (1 for a unitary stage).
    """
    w = np.asarray(weights, dtype=complex).reshape(2, 2)
    wid = w if ideal_weights is None else np.asarray(ideal_weights, dtype=complex).reshape(2, 2)
    x = np.asarray(mode, dtype=complex)
    m_modes = x.size
    if m_modes > MAX_ORACLE_MODES:
        raise ValueError(f"oracle supports at most {MAX_ORACLE_MODES} modes, got {m_modes}")
    opt = np.asarray(optical_out, dtype=complex).reshape(2, m_modes)
    c1 = np.asarray(mw_c1, dtype=complex).reshape(2, m_modes)
    c2 = np.asarray(mw_c2, dtype=complex).reshape(2, m_modes)
    signs = (1, -1)

    # joint[i][s][k]: (signal, env) matrix; ideal[i][t][k]: Fock vector
    joint = [[[beam_splitter_lift(coherent_fock(s * alpha * x[k], truncation), c1[i, k], c2[i, k])
               for k in range(m_modes)] for s in signs] for i in range(2)]
    ideal = [[[coherent_fock(t * ideal_signs[i] * alpha * x[k], truncation).amplitudes
               for k in range(m_modes)] for t in signs] for i in range(2)]

    def frob(a, b):
        return complex(np.vdot(a, b))

    branches = [(i, s) for i in range(2) for s in range(2)]
    opt_gram = [complex(np.vdot(opt[i], opt[i])) for i in range(2)]
    opt_ideal = [complex(np.vdot(x, opt[i])) for i in range(2)]

    prob = 0.0 + 0j
    mw_norm = 0.0 + 0j
    for i, s in branches:
        for i2, s2 in branches:
            if i != i2:
                continue
            prod = np.prod([frob(joint[i][s2][k], joint[i][s][k]) for k in range(m_modes)])
            coeff = w[i, s] * np.conj(w[i2, s2]) * prod
            prob += coeff * opt_gram[i]
            mw_norm += coeff

    # environment vectors left after projecting the signal onto each ideal component
    env = {(i, s, t): [ideal[i][t][k].conj() @ joint[i][s][k] for k in range(m_modes)]
           for i, s in branches for t in range(2)}
    amp = {(i, s, t): w[i, s] * opt_ideal[i] * np.conj(wid[i, t])
           for i, s in branches for t in range(2)}
    proj = 0.0 + 0j
    for key_a, va in env.items():
        for key_b, vb in env.items():
            prod = np.prod([np.vdot(vb[k], va[k]) for k in range(m_modes)])
            proj += amp[key_a] * np.conj(amp[key_b]) * prod

    ideal_norm = 0.0 + 0j
    for i in range(2):
        for t in range(2):
            for t2 in range(2):
                prod = np.prod([np.vdot(ideal[i][t2][k], ideal[i][t][k]) for k in range(m_modes)])
                ideal_norm += wid[i, t] * np.conj(wid[i, t2]) * prod * np.vdot(x, x)

    if prob.real <= 0:
        raise DegenerateChannelError("post-selection probability is zero")
    return OracleResult(fidelity=float(proj.real / (prob.real * ideal_norm.real)),
                        probability=float(prob.real), mw_norm=float(np.sqrt(mw_norm.real)))
