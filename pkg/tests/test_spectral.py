import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridcz.errors import GridMismatchError, GridTooCoarseError
from hybridcz.spectral import (FrequencyGrid, SampledMode, apply_pointwise, check_resolves,
                               default_grid, inner_product, make_gaussian_mode, norm,
                               time_envelope)

T0 = 0.5e-6


def test_trapezoid_weights_integrate_linear_exactly():
    g = FrequencyGrid(1.0, 4.0, 9)
    assert np.isclose(np.sum(g.weights), 4.0)
    assert np.isclose(np.sum(g.weights * g.omega), 4.0 * 1.0)


def test_refined_grid_keeps_endpoints():
    g = FrequencyGrid(0.0, 2.0, 5)
    r = g.refined(2)
    assert r.n_points == 9
    assert np.allclose(r.omega[::2], g.omega)


def test_grid_validation():
    with pytest.raises(ValueError):
        FrequencyGrid(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        FrequencyGrid(0.0, -1.0, 11)


def test_gaussian_mode_is_normalized():
    f = make_gaussian_mode(default_grid(T0), T0)
    assert abs(f.norm - 1) < 1e-12
    assert f.normalized


def test_gaussian_intensity_convention():
    f = make_gaussian_mode(default_grid(T0), T0)
    t = np.array([0.0, T0])
    env = np.abs(time_envelope(f, t)) ** 2
    assert env[1] / env[0] == pytest.approx(np.exp(-2), rel=1e-9)
    tt = np.linspace(-8 * T0, 8 * T0, 4001)
    total = np.trapezoid(np.abs(time_envelope(f, tt)) ** 2, tt)
    assert total == pytest.approx(1.0, rel=1e-9)


def test_delay_phase_shifts_the_pulse_later():
    g = default_grid(T0)
    tau = 0.7e-6
    f = make_gaussian_mode(g, T0, delay=tau)
    t = np.linspace(-3e-6, 3e-6, 6001)
    env = np.abs(time_envelope(f, t))
    assert t[np.argmax(env)] == pytest.approx(tau, abs=2e-9)


def test_grid_mismatch_is_rejected():
    f = make_gaussian_mode(default_grid(T0), T0)
    h = make_gaussian_mode(default_grid(T0, n_points=4097), T0)
    with pytest.raises(GridMismatchError):
        inner_product(f, h)
    with pytest.raises(GridMismatchError):
        apply_pointwise(f, np.ones(10))


def test_coarse_grid_is_rejected():
    with pytest.raises(GridTooCoarseError):
        make_gaussian_mode(FrequencyGrid(0.0, 2 * np.pi / T0, 2049), T0)
    with pytest.raises(GridTooCoarseError):
        check_resolves(FrequencyGrid(0.0, 16 * 2 * np.pi / T0, 65), 2 * np.pi / T0)


def test_sampled_mode_is_read_only():
    f = make_gaussian_mode(default_grid(T0), T0)
    with pytest.raises(ValueError):
        f.amplitudes[0] = 1.0


def test_quadrature_converges_on_refinement():
    g = default_grid(T0, n_points=257)
    h = lambda grid: np.exp(1j * grid.omega * 1e-7)
    coarse = make_gaussian_mode(g, T0)
    fine = make_gaussian_mode(g.refined(4), T0)
    a = inner_product(coarse, apply_pointwise(coarse, h(g)))
    b = inner_product(fine, apply_pointwise(fine, h(fine.grid)))
    exact = np.exp(-(1e-7) ** 2 / T0 ** 2 / 2)
    assert abs(b - exact) < 1e-12
    assert abs(a - exact) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    g = FrequencyGrid(0.0, 1.0, 33)
    f = SampledMode(g, rng.normal(size=33) + 1j * rng.normal(size=33))
    h = SampledMode(g, rng.normal(size=33) + 1j * rng.normal(size=33))
    assert abs(inner_product(f, h)) <= norm(f) * norm(h) * (1 + 1e-12)


def test_modes_scale_and_normalize():
    g = default_grid(T0, n_points=513)
    f = make_gaussian_mode(g, T0).scaled(3.0)
    assert f.norm == pytest.approx(3.0)
    assert f.normalize().norm == pytest.approx(1.0)
    with pytest.raises(ValueError):
        SampledMode(g, np.zeros(g.n_points)).normalize()
