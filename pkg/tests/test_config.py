import numpy as np
import pytest

from hybridcz.config import DEFAULTS, SweepAxis, format_value, load_config, parse_config, resolve
from hybridcz.errors import ConfigError

TWO_PI = 2 * np.pi


def test_empty_file_gives_tabulated_defaults(tmp_path):
    path = tmp_path / "empty.conf"
    path.write_text("")
    cfg = load_config(path)
    assert np.isclose(cfg.cqed.g_m, TWO_PI * 2.723e6)
    assert np.isclose(cfg.cqed.kappa, TWO_PI * 2e6)
    assert np.isclose(cfg.cqed.gamma_s, TWO_PI * 4.78e3)
    assert np.isclose(cfg.pulse_duration, 0.5e-6)
    assert np.isclose(cfg.eit_L.schedule.storage_time, 16e-6)
    assert np.isclose(cfg.eit_L.gamma_ba, TWO_PI * 3e6)
    assert np.isclose(cfg.eit_R.g, TWO_PI * 0.012e6)
    assert np.isclose(cfg.eit_L.g, TWO_PI * 0.029e6)
    assert np.isclose(cfg.eit_L.gamma_bc, TWO_PI * 3.5e3)
    assert np.isclose(cfg.eit_R.gamma_bc, TWO_PI * 16.0)
    assert np.isclose(cfg.alpha0, np.sqrt(2))


def test_internal_loss_is_relative_to_kappa():
    cfg = resolve(parse_config("cqed.kappa_s_over_kappa = 0.001\n"))
    assert np.isclose(cfg.cqed.kappa_s, 1e-3 * cfg.cqed.kappa)


def test_kappa_over_g_m_overrides_kappa():
    cfg = resolve(parse_config("cqed.kappa_over_g_m = 0.3"))
    assert np.isclose(cfg.cqed.kappa, 0.3 * cfg.cqed.g_m)


def test_comments_and_blank_lines():
    vals = parse_config("# header\n\ncat.alpha0 = 2  # trailing\n")
    assert vals == {"cat.alpha0": 2.0}


def test_misspelled_key_names_nearest_valid_key():
    with pytest.raises(ConfigError) as err:
        parse_config("\ncqed.kapa_over_2pi_mhz = 2\n")
    msg = str(err.value)
    assert msg.startswith("line 2: ")
    assert "cqed.kapa_over_2pi_mhz" in msg and "cqed.kappa_over_2pi_mhz" in msg
    assert err.value.key == "cqed.kapa_over_2pi_mhz"


@pytest.mark.parametrize("text", [
    "cat.alpha0",
    "cat.alpha0 = fast",
    "cat.alpha0 = inf",
    "run.flat_transfers = maybe",
    "grid.n_points = 2049.5",
    "cat.alpha0 = 1\ncat.alpha0 = 2",
    "sweep.axis1 = cqed.kappa_s_over_kappa, 1e-4, 1e-2, 1, log",
    "sweep.axis1 = cqed.kappa_s_over_kappa, 0, 1e-2, 3, log",
    "sweep.axis1 = run.engine, 0, 1, 3, linear",
    "sweep.axis1 = cat.alpha0, 1, 2, 3, cubic",
    " = 3",
])
def test_parse_errors(text):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert str(err.value).startswith("line ")


@pytest.mark.parametrize("values", [
    {"cqed.kappa_over_2pi_mhz": 0.0},
    {"cqed.gamma_s_over_2pi_khz": -1.0},
    {"run.engine": "exact"},
    {"eit.t_on_us": 1.0},
    {"grid.n_points": 33},
    {"grid.span_factor": 4.0},
    {"run.oracle_bins": 100},
    {"run.mean_field_tol": 1e-3},
    {"eit.n_atoms": 0.0},
])
def test_validation_errors_name_the_key(values):
    with pytest.raises(ConfigError) as err:
        resolve(values)
    assert err.value.key is not None


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")


def test_sweep_axis_points():
    axis = parse_config("sweep.axis1 = cqed.kappa_s_over_kappa, 1e-4, 1e-2, 3, log")["sweep.axis1"]
    assert np.allclose(axis.points(), [1e-4, 1e-3, 1e-2])
    lin = SweepAxis("cqed.kappa_over_g_m", 0.1, 0.5, 3, "linear")
    assert np.allclose(lin.points(), [0.1, 0.3, 0.5])
    again = parse_config(f"sweep.axis1 = {axis.text()}")["sweep.axis1"]
    assert again == axis


def test_with_value_revalidates():
    cfg = resolve({})
    assert cfg.with_value("cat.alpha0", 2.0).alpha0 == 2.0
    with pytest.raises(ConfigError):
        cfg.with_value("cat.alpha", 2.0)


def test_format_value_round_trips_every_default():
    cfg = resolve({})
    text = "\n".join(f"{k} = {format_value(v)}" for k, v in cfg.values)
    assert resolve(parse_config(text)).values == cfg.values
    assert set(cfg.value_map) == set(DEFAULTS)
