"""Discrete forms on the 3-torus: potentials, pairings, gauge freedom."""

import numpy as np
import pytest

from mu3.catalog import catalog
from mu3.errors import GridMismatch, NotExact, UndersampledField
from mu3.forms import (
    Form1OnT3,
    Form2OnT3,
    curl_spectral,
    degree_scale_means,
    harmonic_part,
    hopf_integral_spectral,
    integrate_alpha_wedge_omega,
    pullback_area_form,
    read_form3,
    solve_potential,
    write_form3,
)
from mu3.maps import conf_map3, sample_on_grid

TWO_PI = 2.0 * np.pi


def _grid_angles(n):
    th = np.arange(n) * (TWO_PI / n)
    return np.meshgrid(th, th, th, indexing="ij")


def _beltrami(n):
    # curl of this field is the field itself, so the pairing integral is
    # the L2 norm squared: 3 * (2*pi)^3, a closed-form anchor
    s, t, u = _grid_angles(n)
    W = np.stack(
        [np.sin(u) + np.cos(t), np.sin(s) + np.cos(u), np.sin(t) + np.cos(s)]
    )
    return Form2OnT3(W, (n, n, n), 0.0, 0.0)


def _borromean_form(n=32):
    e = catalog("borromean")
    g = sample_on_grid(conf_map3(*e.components), n)
    return pullback_area_form(g)


def test_beltrami_pairing_matches_closed_form():
    omega = _beltrami(16)
    alpha = solve_potential(omega)
    exact = 3.0 * TWO_PI**3
    assert abs(integrate_alpha_wedge_omega(alpha, omega) - exact) < 1e-8
    W = omega.W
    assert abs(hopf_integral_spectral(W[0], W[1], W[2]) - exact) < 1e-8


def test_potential_inverts_curl():
    omega = _beltrami(16)
    alpha = solve_potential(omega)
    assert np.allclose(curl_spectral(alpha), omega.W, atol=1e-10)
    # the coulomb gauge of a divergence-free zero-mean field is the field
    assert np.allclose(alpha.A, omega.W, atol=1e-10)


def _random_gradients(shape, seed, k=5):
    # analytic gradients of random trigonometric scalars, built without
    # any spectral machinery from the package
    rng = np.random.default_rng(seed)
    n = shape[0]
    th = np.arange(n) * (TWO_PI / n)
    s, t, u = np.meshgrid(th, th, th, indexing="ij")
    G = np.zeros((3,) + shape)
    for _ in range(k):
        p = rng.integers(-3, 4, size=3)
        a = rng.normal()
        c = rng.uniform(0.0, TWO_PI)
        phase = p[0] * s + p[1] * t + p[2] * u + c
        cos = a * np.cos(phase)
        for i in range(3):
            G[i] += p[i] * cos
    return G


def test_pairing_is_gauge_invariant():
    omega = _borromean_form(32)
    alpha = solve_potential(omega)
    base = integrate_alpha_wedge_omega(alpha, omega)
    worst = 0.0
    for seed in range(20):
        shifted = Form1OnT3(alpha.A + _random_gradients(omega.shape, seed), omega.shape)
        got = integrate_alpha_wedge_omega(shifted, omega)
        worst = max(worst, abs(got - base) / abs(base))
    assert worst < 1e-8


def test_spectral_route_matches_potential_route():
    omega = _borromean_form(32)
    alpha = solve_potential(omega)
    two_step = integrate_alpha_wedge_omega(alpha, omega)
    direct = hopf_integral_spectral(omega.W[0], omega.W[1], omega.W[2])
    assert abs(direct - two_step) < 1e-10 * max(1.0, abs(two_step))


def test_nonzero_pairwise_linking_blocks_potential():
    e = catalog("hopf_plus_unknot")
    g = sample_on_grid(conf_map3(*e.components), 32)
    omega = pullback_area_form(g)
    with pytest.raises(NotExact):
        solve_potential(omega)


def test_harmonic_means_recover_pairwise_degrees():
    e = catalog("hopf_plus_unknot")
    g = sample_on_grid(conf_map3(*e.components), 48)
    omega = pullback_area_form(g)
    degs = degree_scale_means(omega)
    expected = np.array(e.expected_pairwise_lk[::-1], dtype=float)
    assert np.allclose(degs, expected, atol=5e-3)
    assert np.allclose(harmonic_part(omega) * TWO_PI**2, degs, atol=1e-15)


def test_borromean_form_is_nearly_exact():
    omega = _borromean_form(32)
    assert np.max(np.abs(degree_scale_means(omega))) < 5e-2
    assert omega.div_residual < 1e-12
    assert omega.div_residual_raw < 5e-2


def test_undersampled_grid_is_rejected():
    e = catalog("borromean")
    g = sample_on_grid(conf_map3(*e.components), 8)
    with pytest.raises(UndersampledField):
        pullback_area_form(g)


def test_grid_mismatch_is_rejected():
    omega = _beltrami(16)
    alpha = solve_potential(_beltrami(24))
    with pytest.raises(GridMismatch):
        integrate_alpha_wedge_omega(alpha, omega)


def test_form_file_roundtrip(tmp_path):
    omega = _borromean_form(32)
    path = tmp_path / "form.mu3f"
    write_form3(path, omega)
    back = read_form3(path)
    assert back.shape == (32, 32, 32)
    assert np.allclose(back.W, omega.W, atol=1e-12)
    assert back.div_residual < 1e-10
