"""Ergodic estimation of the triple invariant from tube-field orbits.

Per sample: one orbit per tube, closed inside its tube, lifted to the
3-sphere and pushed through the grid pipeline.  Grid sizes per axis come
from an angular-rate profile along each closed orbit; the same profile
drives an equalizing reparametrization so pole passages do not starve the
rest of the curve of resolution.  Samples whose grids exceed the point cap
are skipped, and the whole run aborts once skips pass the reliability
budget.
"""

from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np
from scipy.spatial import cKDTree

from .curves import PolyCurve, ReparamCurve
from .errors import (
    EstimatorUnreliable,
    IncompleteTable,
    NotExact,
    UndersampledField,
    UnresolvablePole,
)
from .fastkernel import fused_pullback, polyline_lk
from .forms import TOL_EXACT, hopf_integral_spectral
from .maps import CELL_FLAG_ANGLE, ConfMap3
from .orbits import _close_in_tube, _integrate_tube, default_dt
from .quat import inv_stereo

TWO_PI = 2.0 * np.pi
MAX_GRID_POINTS = 65_000_000
C_BASE = 3.0          # baseline angular rate, radians per unit arc
DENSITY_FLOOR = 0.15  # reparametrization stays a degree-1 diffeomorphism
SAFETY = 1.15
MIN_AXIS = 16
RETRY_TARGET = 0.9    # retry aims at this fraction of the flag angle
SKIP_BUDGET = 0.2


def _even_ceil(x):
    n = int(np.ceil(x))
    return n + (n % 2)


@dataclass
class TriplePlan:
    curves: list      # reparametrized lifted curves
    axes: tuple
    total_rads: tuple


def plan_triple(nodes_list, c_base=C_BASE, floor=DENSITY_FLOOR, safety=SAFETY):
    """Profile the three closed polylines and plan grid axes.

    The per-node angular rate combines curve speed with the inverse
    distances to the two partner curves (chordal, with slack for the
    partner's node spacing), plus a baseline for the far field.
    """
    polys = [PolyCurve(nd) for nd in nodes_list]
    lifted = [inv_stereo(p.nodes) for p in polys]
    trees = [cKDTree(L) for L in lifted]
    gaps = [
        float(np.linalg.norm(np.roll(L, -1, axis=0) - L, axis=1).max())
        for L in lifted
    ]
    curves = []
    axes = []
    rads = []
    for i in range(3):
        L = lifted[i]
        m = len(L)
        dtheta = TWO_PI / m
        speed = np.linalg.norm(np.roll(L, -1, axis=0) - L, axis=1) / dtheta
        rate = np.full(m, c_base) * np.maximum(speed, 1e-12)
        for j in range(3):
            if j == i:
                continue
            d, _ = trees[j].query(L)
            d = np.maximum(d - 0.5 * gaps[j], 0.5 * d)
            rate += speed / d
        total = float(np.sum(rate) * dtheta)
        axes.append(max(MIN_AXIS, _even_ceil(total / CELL_FLAG_ANGLE * safety)))
        rads.append(total)
        dens = np.maximum(rate, floor * rate.max())
        cum = np.concatenate([[0.0], np.cumsum(dens * dtheta)])
        phi_grid = cum * (TWO_PI / cum[-1])
        theta_grid = np.arange(m + 1) * dtheta
        curves.append(ReparamCurve(polys[i], phi_grid, theta_grid))
    return TriplePlan(curves, tuple(axes), tuple(rads))


def hopf_of_plan(plan, cap=MAX_GRID_POINTS, grid_n=None):
    """Grid invariant of one planned triple, with one flag-gated retry.

    The retry enlarges the axes when either the cell-variation flag trips
    or the measured pairwise degrees drift from integers: degree accuracy
    needs denser sampling than the variation flag alone guarantees, and
    the drift falls off at second order in the grid spacing.
    """
    axes = (grid_n, grid_n, grid_n) if grid_n else plan.axes
    cm = ConfMap3(*plan.curves)
    for attempt in (0, 1):
        if grid_n is None and int(np.prod(axes, dtype=np.int64)) > cap:
            raise UndersampledField(
                "required grid %s exceeds the %d-point cap" % (axes, cap)
            )
        grids = [np.arange(n) * (TWO_PI / n) for n in axes]
        P, Q = cm._product_charts(*grids)
        W, min_dot = fused_pullback(
            np.ascontiguousarray(P), np.ascontiguousarray(Q)
        )
        angle = float(np.arccos(np.clip(min_dot, -1.0, 1.0)))
        means = np.array([np.mean(W[i], dtype=np.float64) for i in range(3)])
        degs = means * TWO_PI ** 2
        drift = float(np.max(np.abs(degs)))
        if angle <= CELL_FLAG_ANGLE and drift < TOL_EXACT:
            break
        if attempt == 1 or grid_n is not None:
            if angle > CELL_FLAG_ANGLE:
                raise UndersampledField(
                    "cell variation %.2f rad on grid %s" % (angle, axes)
                )
            raise NotExact(
                "nonzero pairwise degrees %s on an orbit triple"
                % np.array2string(degs, precision=4)
            )
        scale = 1.0
        if angle > CELL_FLAG_ANGLE:
            scale = angle / (RETRY_TARGET * CELL_FLAG_ANGLE)
        if drift >= TOL_EXACT:
            scale = max(scale, float(np.sqrt(drift / (RETRY_TARGET * TOL_EXACT))))
        axes = tuple(_even_ceil(n * scale) for n in axes)
    h = hopf_integral_spectral(W[0], W[1], W[2])
    return float(h), {"axes": axes, "max_cell_angle": angle, "degrees": degs}


def hopf_of_triple(nodes_list, cap=MAX_GRID_POINTS, grid_n=None):
    return hopf_of_plan(plan_triple(nodes_list), cap=cap, grid_n=grid_n)


@dataclass
class SampleOutcome:
    windings: tuple
    axes: tuple
    hopf: float
    contribution: float
    skipped: str  # empty when used


@dataclass
class ErgodicEstimate:
    estimate: float
    stderr: float
    used: int
    skipped: int
    total: int
    skip_reasons: dict
    samples: list
    T: float
    seed: int

    def __float__(self):
        return self.estimate

    def to_dict(self):
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "used": self.used,
            "skipped": self.skipped,
            "total": self.total,
            "skip_reasons": dict(self.skip_reasons),
        }


def _system_of(field):
    return field.support if hasattr(field, "support") else field


def _draw_orbits(system, samples, T, seed, dt=None, transform=None, detour=0):
    """One closed orbit polyline per tube per sample, batched per tube.

    T is a single absolute time shared by all tubes.  Start points come
    from one seeded stream in tube order, so the per-sample pipelines stay
    pure functions of their starts and can run in any order.
    """
    rng = np.random.default_rng(seed)
    tubes = system.tubes
    starts = [tube.sample_uniform(rng, samples) for tube in tubes]
    polys = [[None] * samples for _ in tubes]
    winds = np.zeros((len(tubes), samples), dtype=int)
    closures = np.zeros((len(tubes), samples))
    for i, tube in enumerate(tubes):
        step = dt if dt is not None else default_dt(tube)
        traj, xis = _integrate_tube(tube, starts[i], T, step)
        for j in range(samples):
            nodes, w, clen = _close_in_tube(
                tube, traj[:, j, :], xis[:, j], detour=detour
            )
            if transform is not None:
                nodes = transform(nodes)
            polys[i][j] = np.ascontiguousarray(nodes)
            winds[i, j] = w
            closures[i, j] = clen
    return polys, winds, closures, starts


def asymptotic_mu123(
    field,
    samples=64,
    T=1.0,
    seed=0,
    dt=None,
    grid_n=None,
    max_grid_points=MAX_GRID_POINTS,
    skip_budget=SKIP_BUDGET,
    transform=None,
    closure_detour=0,
):
    """Monte Carlo estimate of (invariant) x (product of tube fluxes).

    Per sample the three closed orbits feed the grid pipeline, and the
    contribution is (product of tube volumes) * raw_value / T^3 with T the
    common absolute integration time.  dt overrides the RK4 step.
    transform, when given, is a volume-preserving map applied to every
    closed orbit polyline before the grid stage; closure_detour switches to
    the deliberately longer closure family.
    """
    system = _system_of(field)
    if len(system.tubes) != 3:
        raise ValueError("the triple estimator needs exactly three tubes")
    polys, winds, closures, _ = _draw_orbits(
        system, samples, T, seed, dt=dt, transform=transform,
        detour=closure_detour,
    )
    vol_over_t = 1.0
    for tube in system.tubes:
        vol_over_t *= tube.volume / float(T)

    plans = {}
    for j in range(samples):
        if all(winds[i, j] != 0 for i in range(3)):
            plans[j] = plan_triple([polys[0][j], polys[1][j], polys[2][j]])

    if grid_n is None and plans:
        sizes = {
            j: int(np.prod(p.axes, dtype=np.int64)) for j, p in plans.items()
        }
        over = [j for j, s in sizes.items() if s > max_grid_points]
        if len(over) > skip_budget * samples:
            raise EstimatorUnreliable(
                "%d of %d samples need grids over the %d-point cap "
                "(median requirement %d points); shorten the orbits or "
                "raise the cap" % (
                    len(over),
                    samples,
                    max_grid_points,
                    int(np.median(list(sizes.values()))),
                )
            )

    outcomes = []
    contribs = []
    skip_reasons = {}
    skipped = 0
    for j in range(samples):
        wj = tuple(int(winds[i, j]) for i in range(3))
        if j not in plans:
            # a non-winding orbit is a contractible loop: exact zero
            outcomes.append(SampleOutcome(wj, (), 0.0, 0.0, ""))
            contribs.append(0.0)
            continue
        try:
            h, info = hopf_of_plan(
                plans[j], cap=max_grid_points, grid_n=grid_n
            )
        except (UndersampledField, NotExact, UnresolvablePole) as exc:
            skipped += 1
            reason = type(exc).__name__
            skip_reasons[reason] = skip_reasons.get(reason, 0) + 1
            outcomes.append(SampleOutcome(wj, (), np.nan, np.nan, reason))
            if skipped > skip_budget * samples:
                raise EstimatorUnreliable(
                    "%d of %d samples skipped (%s)"
                    % (skipped, samples, skip_reasons)
                ) from exc
            continue
        e = 0.5 * h * vol_over_t
        contribs.append(e)
        outcomes.append(SampleOutcome(wj, info["axes"], h, e, ""))

    used = len(contribs)
    if used == 0:
        raise EstimatorUnreliable("no usable samples")
    estimate = float(np.mean(contribs))
    stderr = (
        float(np.std(contribs, ddof=1) / np.sqrt(used)) if used > 1 else 0.0
    )
    return ErgodicEstimate(
        estimate, stderr, used, skipped, samples, skip_reasons, outcomes,
        float(T), int(seed),
    )


def core_linking(system, i, j, n=2048):
    system = _system_of(system)
    th = np.arange(n) * (TWO_PI / n)
    a = system.tubes[i].core.point(th)
    b = system.tubes[j].core.point(th)
    return int(np.rint(polyline_lk(np.ascontiguousarray(a), np.ascontiguousarray(b))))


def pairwise_helicity_check(field, samples=32, T=1.0, seed=0, dt=None):
    """Orbit-averaged pairwise linking against lk(cores) x flux x flux.

    Returns one entry per tube pair with the estimate, its standard error,
    and the flux-weighted core-linking prediction.
    """
    system = _system_of(field)
    polys, winds, closures, _ = _draw_orbits(system, samples, T, seed, dt=dt)
    out = []
    ntubes = len(system.tubes)
    for i in range(ntubes):
        for j in range(i + 1, ntubes):
            scale = (
                system.tubes[i].volume
                * system.tubes[j].volume
                / (float(T) * float(T))
            )
            vals = np.array(
                [
                    scale * polyline_lk(polys[i][m], polys[j][m])
                    for m in range(samples)
                ]
            )
            pred = (
                core_linking(system, i, j)
                * system.tubes[i].flux
                * system.tubes[j].flux
            )
            stderr = (
                float(np.std(vals, ddof=1) / np.sqrt(samples))
                if samples > 1
                else 0.0
            )
            out.append(
                {
                    "pair": (i + 1, j + 1),
                    "estimate": float(np.mean(vals)),
                    "stderr": stderr,
                    "prediction": float(pred),
                }
            )
    return out


def h123_flux_formula(system, mu_table=None):
    """Predicted invariant-weighted flux product.

    system may be a tube system or a bare 3-tuple of fluxes; each entry is
    a scalar (solid torus) or a tuple of per-handle fluxes.  mu_table maps
    handle index triples (1-based) to the invariant of the corresponding
    core combination; a missing combination with nonzero flux weight is an
    error.
    """
    fluxes = system.fluxes if hasattr(system, "fluxes") else tuple(system)
    if len(fluxes) != 3:
        raise IncompleteTable("the formula needs three bodies")
    per = [f if isinstance(f, (tuple, list)) else (f,) for f in fluxes]
    if mu_table is None:
        mu0 = getattr(system, "core_mu123", None)
        if mu0 is None:
            raise IncompleteTable("no invariant entry for these cores")
        mu_table = {(1, 1, 1): mu0}
    total = 0.0
    for combo in _iproduct(*[range(1, len(p) + 1) for p in per]):
        w = per[0][combo[0] - 1] * per[1][combo[1] - 1] * per[2][combo[2] - 1]
        if combo in mu_table:
            total += mu_table[combo] * w
        elif w != 0.0:
            raise IncompleteTable("missing invariant entry for handles %s" % (combo,))
    return total


@dataclass
class EnergyResult:
    value: float
    quad_error: float
    mc_value: float
    mc_stderr: float

    def __float__(self):
        return self.value

    def __repr__(self):
        return "EnergyResult(%.6g +- %.2g, mc %.6g +- %.2g)" % (
            self.value, self.quad_error, self.mc_value, self.mc_stderr,
        )


def _energy_quadrature(system, n_xi, n_rho, n_phi):
    total = 0.0
    for tube in system.tubes:
        if tube.phi0 == 0.0:
            continue
        xi = np.arange(n_xi) * (TWO_PI / n_xi)
        nodes, wts = np.polynomial.legendre.leggauss(n_rho)
        rho = 0.5 * tube.radius * (nodes + 1.0)
        wr = 0.5 * tube.radius * wts
        phi = np.arange(n_phi) * (TWO_PI / n_phi)
        psi2 = tube.profile(rho / tube.radius) ** 2
        speed = tube.core.speed(xi)
        kappa = tube.core.curvature(xi)
        # (1 - rho kappa cos(phi)) rho: phi sum kills the cosine term
        jac = (
            speed[:, None, None]
            * rho[None, :, None]
            * (1.0 - rho[None, :, None] * kappa[:, None, None] * np.cos(phi)[None, None, :])
        )
        total += (
            tube.phi0 ** 2
            * (TWO_PI / n_xi)
            * (TWO_PI / n_phi)
            * float(np.sum(jac * (psi2 * wr)[None, :, None]))
        )
    return total


def energy_l2(field, n_xi=128, n_rho=48, n_phi=32, mc_points=200_000, seed=0):
    """Field energy (squared L2 norm) by tube-coordinate quadrature.

    quad_error is the change under doubling all quadrature counts; the
    Monte Carlo value is an independent cross-check over the bounding box.
    """
    system = _system_of(field)
    coarse = _energy_quadrature(system, n_xi, n_rho, n_phi)
    fine = _energy_quadrature(system, 2 * n_xi, 2 * n_rho, 2 * n_phi)
    rng = np.random.default_rng(seed)
    los = []
    his = []
    for tube in system.tubes:
        lo, hi = tube.bbox
        los.append(lo)
        his.append(hi)
    lo = np.min(los, axis=0)
    hi = np.max(his, axis=0)
    vol = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(mc_points, 3))
    B = system.eval(pts)
    f = np.einsum("ij,ij->i", B, B)
    mc_value = vol * float(np.mean(f))
    mc_stderr = vol * float(np.std(f, ddof=1) / np.sqrt(mc_points))
    return EnergyResult(fine, abs(fine - coarse), mc_value, mc_stderr)
