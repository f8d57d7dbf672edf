import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.constants import physical_constants

from hybridcz.cqed import (CqedParams, derive_gm, flat_transfer, linear_output,
                           linearization_error_estimate, make_drive, mean_field_simulate,
                           mean_field_window, mode_overlap_lambda, reflection_phase,
                           transfer_functions)
from hybridcz.cqed import _slowest_rate
from hybridcz.errors import GridMismatchError, UndefinedPhaseError
from hybridcz.spectral import FrequencyGrid, default_grid, make_gaussian_mode

TWO_PI = 2 * np.pi
T0 = 0.5e-6
PAPER = CqedParams(kappa_s=0.0)


def c1_at(p, w):
    grid = FrequencyGrid(0.0, 2 * abs(w) if w else 1.0, 3)
    tp = transfer_functions(grid, p)
    return tp.c1[2] if w else tp.c1[1], tp.c2[2] if w else tp.c2[1]


def test_empty_lossless_reflects_with_pi():
    p = CqedParams(kappa_s=0.0, occupied=False)
    c1, c2 = c1_at(p, 0.0)
    assert c1 == -1
    assert c2 == 0
    assert reflection_phase(p) == np.pi


def test_occupied_reflection_is_in_phase():
    c1, _ = c1_at(PAPER, 0.0)
    g2 = PAPER.g_m ** 2
    expect = (g2 / PAPER.gamma_s - PAPER.kappa / 2) / (g2 / PAPER.gamma_s + PAPER.kappa / 2)
    assert abs(c1.imag) < 1e-15 and c1.real > 0
    assert np.isclose(c1.real, expect, rtol=1e-12)
    assert abs(reflection_phase(PAPER)) < 0.01


def test_critical_coupling_has_no_phase():
    p = CqedParams(kappa_s=TWO_PI * 2e6, occupied=False)
    with pytest.raises(UndefinedPhaseError):
        reflection_phase(p)


def test_unitarity_over_random_tuples():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10_000):
        g, k, ks, gs = TWO_PI * 10 ** rng.uniform([3, 4, 1, 1], [8, 8, 7, 7])
        w = TWO_PI * 10 ** rng.uniform(2, 8) * rng.choice([-1, 1])
        c1, c2 = c1_at(CqedParams(g, k, ks, gs), w)
        worst = max(worst, abs(abs(c1) ** 2 + abs(c2) ** 2 - 1))
    assert worst < 1e-10


def test_kappa_s_zero_limit_is_unitary_and_noise_free_when_empty():
    grid = default_grid(T0)
    tp = transfer_functions(grid, CqedParams(kappa_s=0.0, occupied=False))
    assert np.all(tp.c2 == 0)
    assert np.allclose(np.abs(tp.c1), 1, atol=1e-14)
    occ = transfer_functions(grid, PAPER)
    assert np.isinf(occ.gamma_eff)
    assert np.allclose(np.abs(occ.c1) ** 2 + np.abs(occ.c2) ** 2, 1, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(w=st.floats(1e3, 1e8), occupied=st.booleans())
def test_reality_of_impulse_response(w, occupied):
    p = CqedParams(occupied=occupied)
    grid = FrequencyGrid(0.0, 2 * w, 3)
    tp = transfer_functions(grid, p)
    assert np.isclose(tp.c1[0], np.conj(tp.c1[2]), rtol=1e-12, atol=1e-15)


def test_lambda_of_constant_reflection():
    grid = default_grid(T0)
    f = make_gaussian_mode(grid, T0)
    for theta in (0.0, np.pi, 0.7):
        lam = mode_overlap_lambda(f, flat_transfer(grid, np.exp(1j * theta)))
        assert np.isclose(lam, np.exp(-1j * theta), atol=1e-12)


def test_lambda_requires_shared_grid():
    f = make_gaussian_mode(default_grid(T0), T0)
    with pytest.raises(GridMismatchError):
        mode_overlap_lambda(f, transfer_functions(default_grid(T0, n_points=1025), PAPER))


def empty_lambdas(ratios):
    grid = default_grid(T0)
    f = make_gaussian_mode(grid, T0)
    return np.array([mode_overlap_lambda(
        f, transfer_functions(grid, CqedParams(kappa=r * PAPER.g_m, kappa_s=0.0, occupied=False)))
        for r in ratios])


def test_empty_cavity_distortion_decreases_with_kappa():
    # distortion measured against the ideal pi reflection, |1 - (-Lambda)|
    d = np.abs(1 + empty_lambdas(np.geomspace(0.05, 0.5, 10)))
    assert d[-1] > 0
    assert np.all(np.diff(d) < 0)


def test_lambda_modulus_passes_through_zero():
    # a narrow cavity leaves most of the pulse off resonance (Lambda ~ +1)
    lam = empty_lambdas([0.05, 0.5])
    assert lam[0].real > 0 > lam[1].real


def test_zero_drive_is_zero_trajectory():
    tr = mean_field_simulate(PAPER, 0.0, lambda t: np.ones_like(t), (0, 1e-6))
    assert np.all(tr.a_c == 0) and np.all(tr.b_out == 0) and np.all(tr.sigma == 0)


def test_tolerance_range_is_enforced():
    with pytest.raises(ValueError):
        mean_field_simulate(PAPER, 1.0, lambda t: np.ones_like(t), (0, 1e-6), tol=1e-3)


def steady(p, n_decays=20):
    t1 = n_decays / _slowest_rate(p)
    return mean_field_simulate(p, 1.0, lambda t: np.ones_like(np.asarray(t, float)), (0, t1),
                               tol=1e-10, t_eval=[0.0, t1])


def test_constant_drive_steady_state():
    p = PAPER
    tr = steady(p)
    k, g, gs = p.kappa, p.g_m, p.gamma_s
    a_expect = -2 * np.sqrt(k) * gs / (2 * g ** 2 + k * gs)
    big_gamma = (k * gs / 2 + g ** 2) / (k / 2 + gs)
    s_expect = 1j * g * np.sqrt(k) / ((gs + k / 2) * big_gamma)
    assert abs(tr.a_c[-1] / a_expect - 1) < 1e-6
    assert abs(tr.sigma[-1] / s_expect - 1) < 1e-6


def test_steady_state_energy_bookkeeping():
    p = CqedParams()
    tr = steady(p)
    inflow = abs(tr.b_in[-1]) ** 2
    outflow = abs(tr.b_out[-1]) ** 2
    lost = p.kappa_s * abs(tr.a_c[-1]) ** 2 + 2 * p.gamma_s * abs(tr.sigma[-1]) ** 2
    assert outflow <= inflow
    assert abs(inflow - outflow - lost) < 1e-6 * inflow


def test_sigma_z_stays_physical():
    f = make_gaussian_mode(default_grid(T0), T0)
    t0, t1 = mean_field_window(PAPER, T0)
    tr = mean_field_simulate(PAPER, 2.0, make_drive(f, t0, t1), (t0, t1))
    assert np.all(tr.sigma_z >= -0.5 - 1e-9) and np.all(tr.sigma_z <= 0.5 + 1e-9)


def test_small_drive_matches_linear_theory():
    p = CqedParams()
    grid = default_grid(T0)
    f = make_gaussian_mode(grid, T0)
    t0, t1 = mean_field_window(p, T0)
    t = np.linspace(t0, t1, 20001)
    alpha = 0.1
    tr = mean_field_simulate(p, alpha, make_drive(f, t0, t1), (t0, t1), t_eval=t)
    lin = linear_output(f, transfer_functions(grid, p), t, alpha)
    assert np.linalg.norm(tr.b_out - lin) / np.linalg.norm(lin) < 1e-3


def test_linearization_estimate_scaling():
    assert linearization_error_estimate(PAPER, 0.0) == 0.0
    one = linearization_error_estimate(PAPER, np.sqrt(2))
    assert np.isclose(linearization_error_estimate(PAPER, 2 * np.sqrt(2)), 4 * one)
    assert linearization_error_estimate(PAPER, 1.0, exact=True) < linearization_error_estimate(PAPER, 1.0)
    with pytest.raises(ValueError):
        linearization_error_estimate(CqedParams(g_m=0.0), 1.0)


def paper_geometry():
    a0 = physical_constants["Bohr radius"][0]
    e = physical_constants["elementary charge"][0]
    w, length = 30e-6, 1.38e-2
    return dict(effective_volume=np.pi / 2 * w ** 2 * length,
                dipole_moment=2847 * a0 * e, mode_amplitude_u=np.exp(-1))


def test_derive_gm_reproduces_tabulated_coupling():
    est = derive_gm(TWO_PI * 20e9, **paper_geometry())
    assert np.isclose(est.rabi / TWO_PI, 2.723e6, rtol=0.05)
    assert np.isclose(est.divided_by_kappa, est.rabi / (TWO_PI * 2e6))


def test_derive_gm_scaling():
    geo = paper_geometry()
    base = derive_gm(TWO_PI * 20e9, **geo).rabi
    half_p = derive_gm(TWO_PI * 20e9, **{**geo, "dipole_moment": geo["dipole_moment"] / 2}).rabi
    quad_v = derive_gm(TWO_PI * 20e9, **{**geo, "effective_volume": geo["effective_volume"] * 4}).rabi
    assert np.isclose(half_p, base / 2)
    assert np.isclose(quad_v, base / 2)
    with pytest.raises(ValueError):
        derive_gm(0.0, **geo)
