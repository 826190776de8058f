"""Solid-torus field construction: fluxes, profiles, diagnostics, failure
modes."""

import numpy as np
import pytest

from oracles import circulation_period, flux_through_section, profile_moments
from mu3.errors import EmbeddingFailed, TubesOverlap
from mu3.tubes import (
    PlateauBump,
    VectorFieldSpec,
    build_borromean_tubes,
    build_hopf_tubes,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def borromean_235():
    return build_borromean_tubes(0.12, (2.0, 3.0, 5.0))


@pytest.fixture(scope="module")
def borromean_unit():
    return build_borromean_tubes(0.12, (1.0, 1.0, 1.0))


def test_profile_plateau_and_support():
    bump = PlateauBump()
    r = np.array([0.0, 0.3, 0.6])
    assert np.allclose(bump(r), 1.0)
    assert bump(np.array([1.0]))[0] == 0.0
    fine = np.linspace(0.6, 1.0, 200)
    vals = bump(fine)
    assert np.all(np.diff(vals) <= 1e-12)


def test_profile_moments_match_quadrature():
    bump = PlateauBump()
    m1, m2 = profile_moments(bump)
    assert abs(bump.moment1 - m1) < 1e-8
    assert abs(bump.moment2 - m2) < 1e-8


def test_cross_sectional_flux_is_the_nominal_flux(borromean_235):
    system, _ = borromean_235
    for tube in system.tubes:
        for xi in (0.0, 1.7, 4.0):
            assert abs(flux_through_section(tube, xi) - tube.flux) < 1e-3


def test_rotation_period_profile(borromean_235):
    system, _ = borromean_235
    for tube in system.tubes:
        for rho, phi in ((0.0, 0.0), (0.05, 1.0), (0.09, 2.5)):
            oracle = circulation_period(tube, rho, phi)
            assert abs(tube.period(rho, phi) - oracle) < 1e-12 * oracle
        assert tube.tau_min <= tube.period(0.0, 0.0)


def test_divergence_residual_small_against_sup(borromean_unit):
    _, spec = borromean_unit
    assert spec.divergence_residual < 1e-3 * spec.field_sup
    assert spec.field_sup > 0.0


def test_boundary_tangency(borromean_unit):
    _, spec = borromean_unit
    assert spec.tangency_residual() < 1e-6


def test_field_vanishes_outside_support(borromean_unit):
    system, spec = borromean_unit
    far = np.array([[9.0, 9.0, 9.0], [0.0, 0.0, 5.0], [-4.0, 2.0, 1.0]])
    assert np.all(spec.eval(far) == 0.0)
    assert np.allclose(spec.eval(far), system.eval(far))


def test_spec_exposes_system_summaries(borromean_235):
    system, spec = borromean_235
    assert spec.fluxes == (2.0, 3.0, 5.0)
    assert spec.core_mu123 == 1
    assert spec.tubes is system.tubes


def test_energy_and_volume_against_monte_carlo(borromean_unit):
    system, _ = borromean_unit
    rng = np.random.default_rng(7)
    tube = system.tubes[0]
    lo, hi = tube.bbox
    box = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(400_000, 3))
    b2 = np.sum(tube.eval(pts)[0] ** 2, axis=1)
    e_err = box * b2.std() / np.sqrt(len(b2))
    assert abs(tube.energy - box * b2.mean()) < 4.0 * e_err
    inside = tube.contains(pts).astype(float)
    v_err = box * inside.std() / np.sqrt(len(b2))
    assert abs(tube.volume - box * inside.mean()) < 4.0 * v_err


def test_uniform_samples_fill_the_tube(borromean_unit):
    system, _ = borromean_unit
    tube = system.tubes[1]
    pts = tube.sample_uniform(np.random.default_rng(3), 2000)
    assert pts.shape == (2000, 3)
    assert np.all(tube.contains(pts))
    _, rho, _ = tube.core.coords(pts)
    # radial cdf of a uniform solid torus is quadratic in rho
    assert abs(np.mean(rho < tube.radius / np.sqrt(2.0)) - 0.5) < 0.05


def test_fat_tubes_are_rejected():
    with pytest.raises(TubesOverlap):
        build_borromean_tubes(0.25, (1.0, 1.0, 1.0))
    with pytest.raises(EmbeddingFailed):
        build_borromean_tubes(0.30, (1.0, 1.0, 1.0))


def test_zero_flux_gives_zero_field():
    system, spec = build_borromean_tubes(0.12, (0.0, 1.0, 1.0))
    tube = system.tubes[0]
    pts = tube.sample_uniform(np.random.default_rng(1), 64)
    assert np.all(tube.eval(pts)[0] == 0.0)
    assert spec.field_sup > 0.0


def test_hopf_pair_builder():
    system, spec = build_hopf_tubes(0.12, (1.0, 1.0))
    assert len(system.tubes) == 2
    assert isinstance(spec, VectorFieldSpec)
    assert spec.core_mu123 is None
    assert spec.divergence_residual < 1e-3 * spec.field_sup
