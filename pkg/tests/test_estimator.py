"""Ergodic orbit-average estimator, flux formula, and field energy."""

import numpy as np
import pytest

from mu3.curves import PolyCurve
from mu3.errors import EstimatorUnreliable, IncompleteTable
from mu3.estimator import (
    ErgodicEstimate,
    asymptotic_mu123,
    core_linking,
    energy_l2,
    h123_flux_formula,
    hopf_of_triple,
    pairwise_helicity_check,
)
from mu3.invariants import mu123
from mu3.orbits import orbit_triple
from mu3.tubes import build_borromean_tubes, build_hopf_tubes


@pytest.fixture(scope="module")
def unit_field():
    return build_borromean_tubes(0.12, (1.0, 1.0, 1.0))


def test_core_linking_numbers(unit_field):
    system, _ = unit_field
    assert [core_linking(system, i, j) for i, j in ((0, 1), (0, 2), (1, 2))] == [0, 0, 0]
    hopf_system, _ = build_hopf_tubes(0.12, (1.0, 1.0))
    assert core_linking(hopf_system, 0, 1) == 1


def test_flux_formula_scales_as_product():
    assert h123_flux_formula((2.0, 3.0, 5.0), {(1, 1, 1): 1}) == 30.0
    assert h123_flux_formula((2.0, 3.0, 5.0), {(1, 1, 1): -1}) == -30.0


def test_flux_formula_reads_the_system(unit_field):
    _, spec = unit_field
    assert h123_flux_formula(spec) == 1.0
    system235, _ = build_borromean_tubes(0.12, (2.0, 3.0, 5.0))
    assert h123_flux_formula(system235) == 30.0


def test_flux_formula_multi_handle_bodies():
    table = {(1, 1, 1): 1, (2, 1, 1): -1}
    assert h123_flux_formula(((1.0, 1.0), 1.0, 1.0), table) == 0.0
    assert h123_flux_formula(((2.0, 1.0), 1.0, 1.0), table) == 1.0
    # an absent combination only matters when its flux weight is nonzero
    assert h123_flux_formula(((1.0, 0.0), 1.0, 1.0), {(1, 1, 1): 1}) == 1.0
    with pytest.raises(IncompleteTable):
        h123_flux_formula(((1.0, 1.0), 1.0, 1.0), {(1, 1, 1): 1})
    with pytest.raises(IncompleteTable):
        h123_flux_formula((1.0, 1.0))
    hopf_pair, hopf_spec = build_hopf_tubes(0.12, (1.0, 1.0))
    with pytest.raises(IncompleteTable):
        h123_flux_formula((1.0, 2.0, 3.0), mu_table=None)


def test_estimate_tracks_the_formula(unit_field):
    _, spec = unit_field
    est = asymptotic_mu123(spec, samples=6, T=0.45, seed=2)
    assert isinstance(est, ErgodicEstimate)
    assert est.used == 6 and est.skipped == 0
    assert est.estimate > 0.0
    assert abs(est.estimate - h123_flux_formula(spec)) < 4.0 * est.stderr
    d = est.to_dict()
    assert d["total"] == 6
    assert float(est) == est.estimate


def test_zero_flux_estimate_is_exactly_zero():
    _, spec = build_borromean_tubes(0.12, (0.0, 0.0, 0.0))
    est = asymptotic_mu123(spec, samples=5, T=1.0, seed=0)
    assert est.estimate == 0.0 and est.stderr == 0.0
    assert est.used == 5 and est.skipped == 0
    assert all(s.windings == (0, 0, 0) for s in est.samples)


def test_grid_cap_aborts_loudly(unit_field):
    _, spec = unit_field
    with pytest.raises(EstimatorUnreliable):
        asymptotic_mu123(spec, samples=4, T=0.5, seed=0, max_grid_points=1000)


def test_pairwise_helicities_vanish_for_unlinked_cores(unit_field):
    _, spec = unit_field
    rows = pairwise_helicity_check(spec, samples=8, T=0.4, seed=1)
    assert [r["pair"] for r in rows] == [(1, 2), (1, 3), (2, 3)]
    for r in rows:
        assert r["prediction"] == 0.0
        assert abs(r["estimate"]) <= 3.0 * r["stderr"] + 1e-9


def test_pairwise_helicity_tracks_linked_cores():
    _, spec = build_hopf_tubes(0.12, (1.0, 1.0))
    rows = pairwise_helicity_check(spec, samples=8, T=0.4, seed=5)
    assert len(rows) == 1
    r = rows[0]
    assert r["prediction"] == 1.0
    assert abs(r["estimate"] - 1.0) < 4.0 * r["stderr"] + 0.25


def test_orbit_triple_invariant_by_two_routes(unit_field):
    # the winding product law fixes the exact value; the fused kernel and
    # the generic grid pipeline must both land on it
    system, _ = unit_field
    starts = [
        t.core.from_coords(x, 0.03, 0.5)
        for t, x in zip(system.tubes, (0.3, 1.2, 2.7))
    ]
    ot = orbit_triple(system, starts, 0.3)
    assert ot.windings == (2, 2, 2)
    exact = 2 * np.prod(ot.windings)
    fast, info = hopf_of_triple([np.ascontiguousarray(c) for c in ot.curves])
    grid = 2.0 * mu123(tuple(PolyCurve(c) for c in ot.curves), 96).raw
    assert int(np.rint(fast)) == exact
    assert int(np.rint(grid)) == exact
    assert abs(fast - grid) < 0.25


def test_energy_quadrature_and_monte_carlo_agree(unit_field):
    system, spec = unit_field
    e = energy_l2(spec, n_xi=48, n_rho=24, n_phi=12, mc_points=40_000, seed=0)
    assert e.value > 0.0
    assert abs(e.value - e.mc_value) < 4.0 * e.mc_stderr
    assert abs(e.value - sum(t.energy for t in system.tubes)) < 10.0 * e.quad_error


def test_energy_quadruples_with_doubled_flux():
    _, f1 = build_borromean_tubes(0.12, (1.0, 1.0, 1.0))
    _, f2 = build_borromean_tubes(0.12, (2.0, 2.0, 2.0))
    e1 = energy_l2(f1, n_xi=48, n_rho=24, n_phi=12, mc_points=20_000, seed=0)
    e2 = energy_l2(f2, n_xi=48, n_rho=24, n_phi=12, mc_points=20_000, seed=0)
    assert abs(e2.value / e1.value - 4.0) < 1e-12
