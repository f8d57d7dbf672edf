"""Run configuration: a line-oriented ``key = value`` file with dotted keys.

Frequencies in the file are ordinary (not angular) and carry their unit in
the key name, e.g. ``cqed.kappa_over_2pi_mhz = 2.0``; they are converted to
rad/s here and nowhere else.  Missing keys take the default parameter set,
unknown keys are errors.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cqed import CqedParams
from .eit import ControlSchedule, EitChannelParams
from .errors import ConfigError

__all__ = [
    "RunConfig",
    "SweepAxis",
    "DEFAULTS",
    "ENGINES",
    "load_config",
    "parse_config",
    "resolve",
    "format_value",
]

TWO_PI = 2 * math.pi
ENGINES = ("linear", "mean-field")

#: every accepted key with its default, in file units
DEFAULTS: dict[str, object] = {
    "cqed.g_m_over_2pi_mhz": 2.723,
    "cqed.kappa_over_2pi_mhz": 2.0,
    "cqed.kappa_over_g_m": None,
    "cqed.kappa_s_over_kappa": 1e-3,
    "cqed.gamma_s_over_2pi_khz": 4.78,
    "cat.alpha0": math.sqrt(2),
    "pulse.duration_us": 0.5,
    "pulse.delay_us": 0.0,
    "grid.span_factor": 16.0,
    "grid.n_points": 2049,
    "eit.omega0_over_2pi_mhz": 30.0,
    "eit.ramp_rate_per_us": 20.0,
    "eit.t_off_us": 2.0,
    "eit.t_on_us": 18.0,
    "eit.total_time_us": 20.0,
    "eit.n_atoms": 6e4,
    "eit.gamma_ba_over_2pi_mhz": 3.0,
    "eit.length_mm": 0.4,
    "eit.balance": True,
    "eit_L.g_over_2pi_khz": 29.0,
    "eit_L.gamma_bc_over_2pi_khz": 3.5,
    "eit_R.g_over_2pi_khz": 12.0,
    "eit_R.gamma_bc_over_2pi_khz": 0.016,
    "run.engine": "linear",
    "run.oracle_check": False,
    "run.flat_transfers": False,
    "run.oracle_bins": 33,
    "run.truncation": 40,
    "run.mean_field_tol": 1e-9,
    "sweep.axis1": None,
    "sweep.axis2": None,
    "linearization.alphas": (1.0, math.sqrt(2), 2.0),
}

_BOOL = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}
_NONNEG = {
    "cqed.g_m_over_2pi_mhz", "cqed.kappa_s_over_kappa", "cqed.gamma_s_over_2pi_khz",
    "cat.alpha0", "eit.gamma_ba_over_2pi_mhz", "eit_L.gamma_bc_over_2pi_khz",
    "eit_R.gamma_bc_over_2pi_khz",
}
_POSITIVE = {
    "cqed.kappa_over_2pi_mhz", "cqed.kappa_over_g_m", "pulse.duration_us", "grid.span_factor",
    "eit.omega0_over_2pi_mhz", "eit.ramp_rate_per_us", "eit.total_time_us", "eit.n_atoms",
    "eit.length_mm", "eit_L.g_over_2pi_khz", "eit_R.g_over_2pi_khz", "run.mean_field_tol",
}
#: numeric keys a sweep axis may drive
SWEEPABLE = tuple(k for k, v in DEFAULTS.items()
                  if (isinstance(v, float) or k == "cqed.kappa_over_g_m") and not isinstance(v, bool))


@dataclass(frozen=True)
class SweepAxis:
    path: str
    lo: float
    hi: float
    steps: int
    scale: str = "linear"

    def points(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.steps)
        return np.linspace(self.lo, self.hi, self.steps)

    def text(self) -> str:
        return f"{self.path}, {self.lo!r}, {self.hi!r}, {self.steps}, {self.scale}"


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with every rate in rad/s and every time in s."""

    eit_L: EitChannelParams
    eit_R: EitChannelParams
    cqed: CqedParams
    alpha0: float
    pulse_duration: float
    pulse_delay: float
    grid_span_factor: float
    grid_points: int
    sweep: tuple
    engine: str
    oracle_check: bool
    flat_transfers: bool
    balance: bool
    linearization_alphas: tuple
    oracle_bins: int
    truncation: int
    mean_field_tol: float
    values: tuple

    @property
    def value_map(self) -> dict:
        return dict(self.values)

    def with_value(self, key: str, value) -> "RunConfig":
        vals = self.value_map
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}{_suggest(key)}", key=key)
        vals[key] = value
        return resolve(vals)


def _suggest(key: str) -> str:
    close = difflib.get_close_matches(key, DEFAULTS.keys(), n=1, cutoff=0.5)
    return f"; did you mean {close[0]!r}?" if close else ""


def _unquote(text: str) -> str:
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _parse_float(key: str, text: str, line: int | None) -> float:
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line, key) from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: value must be finite", line, key)
    return val


def _parse_axis(key: str, text: str, line: int | None) -> SweepAxis | None:
    text = _unquote(text)
    if text.lower() in ("", "none"):
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise ConfigError(f"{key}: expected 'path, min, max, steps, log|linear'", line, key)
    path, lo, hi, steps, scale = parts
    if path not in SWEEPABLE:
        raise ConfigError(f"{key}: {path!r} is not a sweepable numeric key{_suggest(path)}", line, key)
    try:
        n = int(steps)
    except ValueError:
        raise ConfigError(f"{key}: steps must be an integer, got {steps!r}", line, key) from None
    if n < 2:
        raise ConfigError(f"{key}: sweep steps must be >= 2", line, key)
    if scale not in ("log", "linear"):
        raise ConfigError(f"{key}: scale must be 'log' or 'linear', got {scale!r}", line, key)
    axis = SweepAxis(path, _parse_float(key, lo, line), _parse_float(key, hi, line), n, scale)
    if scale == "log" and not (axis.lo > 0 and axis.hi > 0):
        raise ConfigError(f"{key}: log axis bounds must be positive", line, key)
    return axis


def _parse_value(key: str, text: str, line: int | None):
    default = DEFAULTS[key]
    text = text.strip()
    if key.startswith("sweep."):
        return _parse_axis(key, text, line)
    if key == "linearization.alphas":
        items = [t for t in _unquote(text).replace(",", " ").split() if t]
        if not items:
            raise ConfigError(f"{key}: expected a list of amplitudes", line, key)
        vals = tuple(_parse_float(key, t, line) for t in items)
        if any(v < 0 for v in vals):
            raise ConfigError(f"{key}: amplitudes must be non-negative", line, key)
        return vals
    if isinstance(default, bool):
        low = text.lower()
        if low not in _BOOL:
            raise ConfigError(f"{key}: expected true/false, got {text!r}", line, key)
        return _BOOL[low]
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}", line, key) from None
    if isinstance(default, str):
        return _unquote(text)
    if default is None and text.lower() == "none":
        return None
    return _parse_float(key, text, line)


def parse_config(text: str) -> dict:
    """Parse config text into a ``{key: value}`` dict of explicitly set keys."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("missing key before '='", lineno)
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}{_suggest(key)}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        values[key] = _parse_value(key, value, lineno)
    return values


def _check_ranges(v: dict) -> None:
    for key in _NONNEG:
        if v[key] < 0:
            raise ConfigError(f"{key} must be non-negative, got {v[key]}", key=key)
    for key in _POSITIVE:
        if v[key] is not None and not v[key] > 0:
            raise ConfigError(f"{key} must be positive, got {v[key]}", key=key)
    if v["run.engine"] not in ENGINES:
        raise ConfigError(f"run.engine must be one of {ENGINES}, got {v['run.engine']!r}", key="run.engine")
    if not v["eit.t_off_us"] >= 0 or not v["eit.t_off_us"] < v["eit.t_on_us"] < v["eit.total_time_us"]:
        raise ConfigError("need 0 <= eit.t_off_us < eit.t_on_us < eit.total_time_us", key="eit.t_on_us")
    if v["grid.span_factor"] < 8:
        raise ConfigError("grid.span_factor must be >= 8 to contain the pulse spectrum",
                          key="grid.span_factor")
    if v["grid.n_points"] - 1 < 16 * v["grid.span_factor"]:
        raise ConfigError("grid.n_points too small: spacing must not exceed bandwidth/16",
                          key="grid.n_points")
    if not 2 <= v["run.oracle_bins"] <= 64:
        raise ConfigError("run.oracle_bins must lie in [2, 64]", key="run.oracle_bins")
    if not 4 <= v["run.truncation"] <= 200:
        raise ConfigError("run.truncation must lie in [4, 200]", key="run.truncation")
    if not 1e-12 <= v["run.mean_field_tol"] <= 1e-6:
        raise ConfigError("run.mean_field_tol must lie in [1e-12, 1e-6]", key="run.mean_field_tol")
    if v["cqed.g_m_over_2pi_mhz"] == 0 and v["cqed.kappa_over_g_m"] is not None:
        raise ConfigError("cqed.kappa_over_g_m needs a non-zero g_m", key="cqed.kappa_over_g_m")
    axes = [a for a in (v["sweep.axis1"], v["sweep.axis2"]) if a is not None]
    if len({a.path for a in axes}) < len(axes):
        raise ConfigError("sweep axes must drive different keys", key="sweep.axis2")


def resolve(explicit: dict) -> RunConfig:
    """Merge ``explicit`` over the defaults, validate and convert to SI/angular units."""
    v = dict(DEFAULTS)
    for k, val in explicit.items():
        if k not in DEFAULTS:
            raise ConfigError(f"unknown key {k!r}{_suggest(k)}", key=k)
        v[k] = val
    _check_ranges(v)
    us = 1e-6
    mhz = TWO_PI * 1e6
    khz = TWO_PI * 1e3
    g_m = v["cqed.g_m_over_2pi_mhz"] * mhz
    if v["cqed.kappa_over_g_m"] is not None:
        kappa = v["cqed.kappa_over_g_m"] * g_m
    else:
        kappa = v["cqed.kappa_over_2pi_mhz"] * mhz
    try:
        cqed = CqedParams(g_m=g_m, kappa=kappa, kappa_s=v["cqed.kappa_s_over_kappa"] * kappa,
                          gamma_s=v["cqed.gamma_s_over_2pi_khz"] * khz)
        schedule = ControlSchedule(
            omega0=v["eit.omega0_over_2pi_mhz"] * mhz,
            ramp_rate=v["eit.ramp_rate_per_us"] / us,
            t_off=v["eit.t_off_us"] * us,
            t_on=v["eit.t_on_us"] * us,
            total_time=v["eit.total_time_us"] * us,
        )
        common = dict(n_atoms=v["eit.n_atoms"], schedule=schedule,
                      gamma_ba=v["eit.gamma_ba_over_2pi_mhz"] * mhz, length=v["eit.length_mm"] * 1e-3)
        eit_l = EitChannelParams(g=v["eit_L.g_over_2pi_khz"] * khz,
                                 gamma_bc=v["eit_L.gamma_bc_over_2pi_khz"] * khz, label="L", **common)
        eit_r = EitChannelParams(g=v["eit_R.g_over_2pi_khz"] * khz,
                                 gamma_bc=v["eit_R.gamma_bc_over_2pi_khz"] * khz, label="R", **common)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sweep = tuple(a for a in (v["sweep.axis1"], v["sweep.axis2"]) if a is not None)
    return RunConfig(
        eit_L=eit_l, eit_R=eit_r, cqed=cqed, alpha0=float(v["cat.alpha0"]),
        pulse_duration=v["pulse.duration_us"] * us, pulse_delay=v["pulse.delay_us"] * us,
        grid_span_factor=float(v["grid.span_factor"]), grid_points=int(v["grid.n_points"]),
        sweep=sweep, engine=v["run.engine"], oracle_check=bool(v["run.oracle_check"]),
        flat_transfers=bool(v["run.flat_transfers"]), balance=bool(v["eit.balance"]),
        linearization_alphas=tuple(v["linearization.alphas"]),
        oracle_bins=int(v["run.oracle_bins"]), truncation=int(v["run.truncation"]),
        mean_field_tol=float(v["run.mean_field_tol"]),
        values=tuple(sorted(v.items())),
    )


def load_config(path) -> RunConfig:
    """Read, parse and validate a config file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return resolve(parse_config(text))


def format_value(value) -> str:
    """File-syntax rendering of a resolved value (used for output headers)."""
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, SweepAxis):
        return value.text()
    if isinstance(value, tuple):
        return ", ".join(repr(float(x)) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
