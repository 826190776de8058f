"""Streamline integration and orbit closure inside tube fields."""

import numpy as np
import pytest

from mu3.errors import ClosureFailed, LeftTube
from mu3.orbits import (
    ClosedOrbit,
    OpenOrbit,
    VortexFlow,
    close_orbit,
    default_dt,
    integrate_orbit,
    orbit_triple,
    transport_polylines,
)
from mu3.tubes import build_borromean_tubes

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def unit_field():
    return build_borromean_tubes(0.12, (1.0, 1.0, 1.0))


def test_orbit_returns_after_one_period(unit_field):
    system, spec = unit_field
    tube = system.tubes[0]
    x0 = tube.core.from_coords(0.3, 0.06, 1.2)
    P = float(tube.period(0.06, 1.2))
    orb = integrate_orbit(spec, x0, P, default_dt(tube))
    assert np.linalg.norm(orb.points[-1] - x0) < 1e-5
    assert orb.tube_index == 0


def test_orbit_stays_inside_tube(unit_field):
    system, spec = unit_field
    tube = system.tubes[1]
    x0 = tube.core.from_coords(1.0, 0.08, 0.4)
    orb = integrate_orbit(spec, x0, 1.0, default_dt(tube))
    _, rho, _ = tube.core.coords(orb.points)
    assert np.max(rho) < tube.radius


def test_integrator_is_fourth_order(unit_field):
    system, spec = unit_field
    tube = system.tubes[0]
    x0 = tube.core.from_coords(0.3, 0.06, 1.2)
    P = float(tube.period(0.06, 1.2))
    errs = [
        np.linalg.norm(integrate_orbit(spec, x0, P, P / 2**k).points[-1] - x0)
        for k in (6, 7, 8)
    ]
    for coarse, fine in zip(errs, errs[1:]):
        assert 8.0 < coarse / fine < 32.0


def test_closure_counts_windings(unit_field):
    system, spec = unit_field
    tube = system.tubes[0]
    x0 = tube.core.from_coords(0.3, 0.04, 0.9)
    P = float(tube.period(0.04, 0.9))
    orb = integrate_orbit(spec, x0, 3.7 * P, default_dt(tube))
    c = close_orbit(orb, system)
    assert isinstance(c, ClosedOrbit)
    assert c.winding == 4  # short-way closure rounds 3.7 turns up
    _, rho, _ = tube.core.coords(c.nodes)
    assert np.max(rho) < tube.radius
    assert c.closure_length < 0.6 * tube.core.length


def test_detour_closure_adds_one_core_pass(unit_field):
    system, spec = unit_field
    tube = system.tubes[0]
    x0 = tube.core.from_coords(0.3, 0.04, 0.9)
    orb = integrate_orbit(spec, x0, 0.7, default_dt(tube))
    plain = close_orbit(orb, system)
    long = close_orbit(orb, system, detour=1)
    assert long.winding == plain.winding + 1
    extra = long.closure_length - plain.closure_length
    assert 0.8 * tube.core.length < extra < 1.3 * tube.core.length
    _, rho, _ = tube.core.coords(long.nodes)
    assert np.max(rho) < tube.radius


def test_point_outside_support_is_a_fixed_point(unit_field):
    system, spec = unit_field
    far = np.array([5.0, 5.0, 5.0])
    orb = integrate_orbit(spec, far, 1.0, 0.01)
    assert orb.tube_index is None
    assert np.all(orb.points == far)
    c = close_orbit(orb, system)
    assert c.winding == 0 and len(c.nodes) == 1


def test_bare_polyline_ending_outside_fails(unit_field):
    system, _ = unit_field
    tube = system.tubes[0]
    bad = np.vstack(
        [tube.core.from_coords(0.0, 0.0, 0.0), tube.core.from_coords(1.0, 0.3, 0.0)]
    )
    with pytest.raises(ClosureFailed):
        close_orbit(bad, system)


def test_giant_step_escapes_the_tube(unit_field):
    system, spec = unit_field
    tube = system.tubes[0]
    x0 = tube.core.from_coords(0.3, 0.06, 1.2)
    with pytest.raises(LeftTube):
        integrate_orbit(spec, x0, 1.0, 0.5)


def test_orbit_triple_collects_three_closed_orbits(unit_field):
    system, spec = unit_field
    starts = [
        t.sample_uniform(np.random.default_rng(k), 1)[0]
        for k, t in enumerate(system.tubes)
    ]
    ot = orbit_triple(system, starts, 0.5)
    assert len(ot.curves) == 3
    assert ot.T == 0.5
    assert all(w >= 0 for w in ot.windings)
    assert all(
        c.shape[1] == 3 and len(c) >= 1 for c in ot.curves
    )
    assert np.allclose(ot.starts, starts)


def test_vortex_flow_preserves_volume_and_moves_points():
    flow = VortexFlow(center=(0.2, 0.0, 0.1), omega=(0.0, 0.4, 1.3), radius=0.8)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-0.5, 0.5, size=(500, 3)) + np.array([0.2, 0.0, 0.1])
    moved = flow.flow(pts, time=1.0)
    assert np.max(np.linalg.norm(moved - pts, axis=1)) > 0.05
    # volume preservation: divergence-free flows keep pairwise simplex
    # volumes of infinitesimal tetrahedra; check via finite differences
    h = 1e-4
    base = pts[:100]
    tets = np.stack(
        [base, base + [h, 0, 0], base + [0, h, 0], base + [0, 0, h]], axis=1
    )
    mapped = flow.flow(tets.reshape(-1, 3), time=1.0).reshape(-1, 4, 3)
    det = np.linalg.det(
        np.stack(
            [mapped[:, 1] - mapped[:, 0], mapped[:, 2] - mapped[:, 0], mapped[:, 3] - mapped[:, 0]],
            axis=1,
        )
    )
    # finite differencing of the flow map leaves O(h) linearization error
    # amplified by the profile curvature; compressibility would show at O(1)
    assert np.allclose(det / h**3, 1.0, atol=5e-3)


def test_transport_polylines_applies_the_flow():
    flow = VortexFlow(center=(0.0, 0.0, 0.0), omega=(0.7, 0.0, 0.0), radius=1.0)
    lines = [np.array([[0.1, 0.0, 0.0], [0.0, 0.1, 0.0]])]
    out = transport_polylines(flow, lines, time=1.0)
    assert len(out) == 1 and out[0].shape == (2, 3)
    assert not np.allclose(out[0], lines[0])
