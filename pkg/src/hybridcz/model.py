"""Assemble both gate stages from a ``RunConfig``.

The optical qubit and the microwave cat share the input mode shape.  The L
polarization stores as a Rydberg spin wave and occupies the cavity; R stores
in the ground manifold and leaves the cavity empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .cqed import (CqedParams, TransferPair, flat_transfer, linear_output, make_drive,
                   mean_field_simulate, mean_field_window, transfer_functions)
from .eit import balance_losses, flat_storage_transfer, storage_transfer
from .fidelity import ChannelOverlaps, GateChannels, linear_overlaps
from .spectral import FrequencyGrid, SampledMode, default_grid, make_gaussian_mode, time_envelope

__all__ = [
    "GateModel",
    "build_model",
    "oracle_channels",
    "channel_overlaps",
    "mean_field_overlaps",
    "MeanFieldChannel",
    "linear_time_output",
]

IDEAL_SIGNS = (1, -1)


@dataclass(frozen=True, eq=False)
class GateModel:
    config: object
    grid: FrequencyGrid
    mode: SampledMode
    storage: tuple
    balance: tuple
    mw: tuple
    channels: GateChannels

    @property
    def cavity(self) -> tuple:
        """(occupied, empty) cavity parameters for the L and R branches."""
        return (self.config.cqed.with_occupation(True), self.config.cqed.with_occupation(False))


def _stage_transfers(cfg, grid: FrequencyGrid, mode: SampledMode):
    cav = (cfg.cqed.with_occupation(True), cfg.cqed.with_occupation(False))
    if cfg.flat_transfers:
        storage = (flat_storage_transfer(grid), flat_storage_transfer(grid))
        dc = [transfer_functions(FrequencyGrid(0.0, 1.0, 3), p).c1[1] for p in cav]
        mw = tuple(flat_transfer(grid, c) for c in dc)
    else:
        storage = tuple(storage_transfer(grid, p, f_in=mode, check_adiabatic=False)
                        for p in (cfg.eit_L, cfg.eit_R))
        mw = tuple(transfer_functions(grid, p) for p in cav)
    return storage, mw


def _balance(cfg, storage) -> tuple:
    if not cfg.balance:
        return (1.0, 1.0)
    return balance_losses(storage[0].c1o, storage[1].c1o)


def build_model(cfg, grid: FrequencyGrid | None = None) -> GateModel:
    """Sample every transfer on ``grid`` (default: the config's grid)."""
    if grid is None:
        grid = default_grid(cfg.pulse_duration, cfg.grid_span_factor, cfg.grid_points)
    mode = make_gaussian_mode(grid, cfg.pulse_duration, cfg.pulse_delay)
    storage, mw = _stage_transfers(cfg, grid, mode)
    bal = _balance(cfg, storage)
    optical = np.array([b * s.transfer for b, s in zip(bal, storage)])
    channels = GateChannels.from_sampled(
        mode, optical, np.array([t.c1 for t in mw]), np.array([t.c2 for t in mw]),
        cfg.alpha0, IDEAL_SIGNS, efficiency=tuple(s.efficiency for s in storage))
    return GateModel(cfg, grid, mode, storage, bal, mw, channels)


def oracle_channels(cfg, n_bins: int | None = None, width: float = 8.0) -> GateChannels:
    """Coarse discretization for the Fock oracle: ``n_bins`` bins over +/- ``width`` sigma.

    ``sigma = sqrt(2) / duration`` is the rms width of the spectral amplitude.
    """
    n_bins = cfg.oracle_bins if n_bins is None else n_bins
    if n_bins < 2:
        raise ValueError("need at least two oracle bins")
    sigma = np.sqrt(2) / cfg.pulse_duration
    bins = FrequencyGrid(0.0, 2 * width * sigma, n_bins)
    w = bins.omega
    amps = np.exp(-(w * cfg.pulse_duration) ** 2 / 4) * np.exp(1j * w * cfg.pulse_delay)
    mode = SampledMode(bins, amps).normalize()
    storage, mw = _stage_transfers(cfg, bins, mode)
    bal = _balance(cfg, storage)
    optical = np.array([b * s.transfer for b, s in zip(bal, storage)])
    return GateChannels.from_sampled(
        mode, optical, np.array([t.c1 for t in mw]), np.array([t.c2 for t in mw]),
        cfg.alpha0, IDEAL_SIGNS, efficiency=tuple(s.efficiency for s in storage))


@dataclass(frozen=True, eq=False)
class MeanFieldChannel:
    """Mean-field output of one cavity branch driven by ``+alpha f(t)``."""

    times: np.ndarray
    b_out: np.ndarray
    envelope: np.ndarray
    max_drift: float
    out_norm2: float
    ideal_overlap: complex


def _simulate_channel(p: CqedParams, mode: SampledMode, duration: float, delay: float,
                      alpha: float, tol: float, n_eval: int = 20001) -> MeanFieldChannel:
    t0, t1 = mean_field_window(p, duration, delay)
    times = np.linspace(t0, t1, n_eval)
    env = time_envelope(mode, times)
    drive = make_drive(mode, t0, t1, n=max(8001, n_eval // 2))
    traj = mean_field_simulate(p, alpha, drive, (t0, t1), tol=tol, t_eval=times)
    b = traj.b_out
    out_norm2 = float(integrate.simpson(np.abs(b) ** 2, x=times))
    ov = complex(integrate.simpson(np.conj(env) * b, x=times)) / alpha
    return MeanFieldChannel(times, b, env, float(np.max(np.abs(traj.sigma_z + 0.5))), out_norm2, ov)


def mean_field_overlaps(model: GateModel) -> tuple[ChannelOverlaps, tuple]:
    """Overlaps with the microwave stage re-run through the mean-field equations.

    The ``-alpha`` branch follows from the ``+alpha`` run by the sign symmetry
    of the equations.  Energy missing from the reflected field is assigned to
    the environment; the cross-channel environment overlap keeps its linear
    phase and is rescaled by the change in the two environment norms.
    """
    cfg = model.config
    lin = linear_overlaps(model.channels)
    alpha = cfg.alpha0
    if alpha == 0:
        return lin, ()
    runs = tuple(_simulate_channel(p, model.mode, cfg.pulse_duration, cfg.pulse_delay,
                                   alpha, cfg.mean_field_tol) for p in model.cavity)
    out_norm2 = np.array([r.out_norm2 for r in runs])
    ideal = np.array([r.ideal_overlap for r in runs])
    diag = np.clip(alpha ** 2 - out_norm2, 0.0, None) / alpha ** 2
    env = np.array(lin.env_gram, dtype=complex)
    lin_diag = env.diagonal().real.copy()
    scale = np.sqrt(np.divide(diag, lin_diag, out=np.ones(2), where=lin_diag > 0))
    env = env * scale[:, None] * scale[None, :]
    env[0, 0], env[1, 1] = diag
    ov = ChannelOverlaps(alpha=lin.alpha, ideal_signs=lin.ideal_signs,
                         optical_norm2=lin.optical_norm2, optical_ideal=lin.optical_ideal,
                         out_norm2=out_norm2, ideal_overlap=ideal, env_gram=env,
                         efficiency=lin.efficiency, source="mean-field")
    return ov, runs


def channel_overlaps(model: GateModel, engine: str = "linear") -> ChannelOverlaps:
    if engine == "linear":
        return linear_overlaps(model.channels)
    if engine == "mean-field":
        return mean_field_overlaps(model)[0]
    raise ValueError(f"unknown engine {engine!r}")


def linear_time_output(model: GateModel, t, branch: int, alpha: float = 1.0) -> np.ndarray:
    """Linear-theory reflected field of branch ``branch`` (0 = occupied, 1 = empty)."""
    tp: TransferPair = model.mw[branch]
    return linear_output(model.mode, tp, t, alpha)

