"""Field-line orbits of tube fields and their closures.

Orbits preserve the tube coordinates (rho, phi) exactly in continuous
time; the integrator tracks the core parameter with warm-started nearest
point solves, so the accumulated parameter is unwrapped for free and
winding numbers come out as exact integers after closure.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ClosureFailed, LeftTube
from .tubes import smoothstep5

TWO_PI = 2.0 * np.pi
LEAVE_TOL = 1e-4


def _wrap_pi(x):
    return (x + np.pi) % TWO_PI - np.pi


def _integrate_tube(tube, q0, T, dt):
    """Batched RK4 along one tube field.

    q0: (m, 3) seed points inside the tube.  Returns (traj, xi) with
    traj (k+1, m, 3) and xi (k+1, m) the unwrapped core parameter.
    """
    q0 = np.atleast_2d(np.asarray(q0, dtype=float))
    if tube.phi0 == 0.0:
        xi0 = tube.core.nearest_xi(q0)
        return np.stack([q0, q0]), np.stack([xi0, xi0])
    steps = max(1, int(np.ceil(T / dt)))
    h = T / steps
    traj = np.empty((steps + 1, q0.shape[0], 3))
    xis = np.empty((steps + 1, q0.shape[0]))
    q = q0.copy()
    xi = tube.core.nearest_xi(q)
    traj[0] = q
    xis[0] = xi
    rmax = tube.radius * (1.0 + LEAVE_TOL)
    for k in range(steps):
        k1, _ = tube.eval(q, warm=xi)
        k2, _ = tube.eval(q + 0.5 * h * k1, warm=xi)
        k3, _ = tube.eval(q + 0.5 * h * k2, warm=xi)
        k4, _ = tube.eval(q + h * k3, warm=xi)
        q = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xi, rho, _ = tube.core.coords(q, warm=xi)
        if np.any(rho > rmax):
            raise LeftTube(
                "orbit radius %.6f exceeds tube radius %.6f at step %d"
                % (float(rho.max()), tube.radius, k + 1)
            )
        traj[k + 1] = q
        xis[k + 1] = xi
    return traj, xis


def _detour_loop(tube, xi_s, rho_s, phi_s, detour):
    """Extra full passes around the core, returning to the same point."""
    total = TWO_PI * abs(int(detour))
    count = max(8, int(np.ceil(total * tube.core.length / TWO_PI / (tube.radius / 4.0))))
    ts = np.linspace(0.0, 1.0, count + 1)[1:-1]
    sgn = 1.0 if detour >= 0 else -1.0
    pts = tube.core.from_coords(
        xi_s + sgn * ts * total,
        np.full(ts.shape, rho_s),
        np.full(ts.shape, phi_s),
    )
    seg = np.diff(np.vstack([pts[:1], pts, pts[:1]]), axis=0)
    return pts, float(np.linalg.norm(seg, axis=1).sum())


def _close_in_tube(tube, traj, xi, detour=0):
    """Close one trajectory inside its tube.

    traj: (k, 3) points of a single orbit, xi: (k,) unwrapped parameters.
    Returns (nodes, winding, closure_length); nodes form a closed polyline
    without a duplicated endpoint.  detour > 0 appends that many extra full
    passes around the core before closing, a deliberately longer admissible
    closure used to probe closure sensitivity.
    """
    start = traj[0]
    end = traj[-1]
    gap = start - end
    glen = float(np.linalg.norm(gap))
    span = xi[-1] - xi[0]
    winding = int(np.rint((span - _wrap_pi(span)) / TWO_PI))

    if glen < 1e-12 and not detour:
        return traj[:-1] if len(traj) > 1 else traj, winding, 0.0

    if not detour:
        # straight chord if it stays inside the tube and cannot be
        # ambiguous about which way around the core it runs
        ts = np.linspace(0.0, 1.0, 9)[1:-1]
        chord = end[None, :] + ts[:, None] * gap[None, :]
        _, rho_c, _ = tube.core.coords(chord)
        short_way = abs(_wrap_pi(xi[0] - xi[-1])) < 0.5 * np.pi
        if short_way and np.all(rho_c < 0.999 * tube.radius):
            count = max(2, int(np.ceil(glen / (tube.radius / 4.0))))
            ts = np.linspace(0.0, 1.0, count + 1)[1:-1]
            arc = end[None, :] + ts[:, None] * gap[None, :]
            nodes = np.vstack([traj, arc])
            return nodes, winding, glen

    # otherwise interpolate in tube coordinates, which cannot leave
    xi_e, rho_e, phi_e = tube.core.coords(end[None, :])
    xi_s, rho_s, phi_s = tube.core.coords(start[None, :])
    if rho_e.max() >= tube.radius or rho_s.max() >= tube.radius:
        raise ClosureFailed("orbit endpoint outside the tube")
    dxi = float(_wrap_pi(xi_s[0] - xi_e[0]))
    dphi = float(_wrap_pi(phi_s[0] - phi_e[0]))
    drho = float(rho_s[0] - rho_e[0])
    arc_scale = max(
        abs(dxi) * tube.core.length / TWO_PI,
        abs(dphi) * tube.radius,
        abs(drho),
    )
    count = max(4, int(np.ceil(arc_scale / (tube.radius / 4.0))))
    ts = np.linspace(0.0, 1.0, count + 1)[1:-1]
    arc = tube.core.from_coords(
        xi_e[0] + ts * dxi, rho_e[0] + ts * drho, phi_e[0] + ts * dphi
    )
    nodes = np.vstack([traj, arc])
    seg = np.diff(np.vstack([[end], arc, [start]]), axis=0)
    closure_len = float(np.linalg.norm(seg, axis=1).sum())
    if detour:
        loop, llen = _detour_loop(tube, xi_s[0], rho_s[0], phi_s[0], detour)
        nodes = np.vstack([nodes, [start], loop])
        closure_len += llen
        winding += int(detour)
    return nodes, winding, closure_len


@dataclass
class OpenOrbit:
    """One integrated field line, still open at the end."""

    points: np.ndarray       # (k+1, 3)
    xi: Optional[np.ndarray]  # unwrapped core parameter, (k+1,)
    tube_index: Optional[int]
    T: float
    dt: float


@dataclass
class ClosedOrbit:
    nodes: np.ndarray        # closed polyline, no duplicated endpoint
    winding: int
    closure_length: float
    tube_index: Optional[int]


def _locate_tube(system, x0):
    tubes = system.tubes if hasattr(system, "tubes") else [system]
    for i, tube in enumerate(tubes):
        if bool(tube.contains(x0[None, :])[0]):
            return i, tube
    return None, None


def integrate_orbit(field, x0, T, dt):
    """Integrate one field line from x0 for absolute time T with RK4 step dt.

    field may be a tube system, a field spec, or a single tube.  A start
    outside every tube sits in the zero field and yields a constant orbit.
    """
    x0 = np.asarray(x0, dtype=float).reshape(3)
    system = field.support if hasattr(field, "support") else field
    idx, tube = _locate_tube(system, x0)
    if tube is None or tube.phi0 == 0.0:
        pts = np.stack([x0, x0])
        xi = None
        if tube is not None:
            x = tube.core.nearest_xi(x0[None, :])
            xi = np.array([x[0], x[0]])
        return OpenOrbit(pts, xi, idx, float(T), float(dt))
    traj, xis = _integrate_tube(tube, x0[None, :], T, dt)
    return OpenOrbit(traj[:, 0, :], xis[:, 0], idx, float(T), float(dt))


def _xi_along(tube, pts):
    """Unwrapped core parameter along a point path, by warm continuation."""
    xi = np.empty(len(pts))
    warm = None
    for k, p in enumerate(pts):
        warm = tube.core.nearest_xi(p[None, :], warm=warm)
        xi[k] = warm[0]
    return xi


def close_orbit(orbit, system, detour=0):
    """Close an open orbit into a closed curve inside its tube.

    Accepts an OpenOrbit or a bare (k, 3) point array.  A degenerate
    zero-length orbit closes to a single repeated point with winding 0.
    """
    if isinstance(orbit, OpenOrbit):
        pts, xi, idx = orbit.points, orbit.xi, orbit.tube_index
    else:
        pts = np.atleast_2d(np.asarray(orbit, dtype=float))
        xi, idx = None, None
    if idx is None:
        idx, tube = _locate_tube(system, pts[0])
    else:
        tube = system.tubes[idx] if hasattr(system, "tubes") else system
    if tube is None:
        if float(np.linalg.norm(pts - pts[0], axis=1).max()) > 1e-12:
            raise ClosureFailed("orbit lies outside every tube")
        return ClosedOrbit(pts[:1], 0, 0.0, None)
    if xi is None:
        xi = _xi_along(tube, pts)
    nodes, winding, clen = _close_in_tube(tube, pts, xi, detour=detour)
    return ClosedOrbit(nodes, winding, clen, idx)


@dataclass
class OrbitTriple:
    curves: list            # closed polyline nodes per tube, (m_i, 3)
    windings: tuple
    T: float                # common absolute integration time
    closure_lengths: tuple
    starts: np.ndarray


def default_dt(tube):
    return tube.tau_min / 256.0 if np.isfinite(tube.tau_min) else 1.0


def orbit_triple(system, starts, T, dt=None, detour=0):
    """Integrate and close one orbit per tube from the given start points.

    T is a single absolute time shared by all tubes; dt defaults per tube
    to 1/256 of its shortest circulation period.
    """
    curves = []
    windings = []
    lengths = []
    for i, tube in enumerate(system.tubes):
        step = dt if dt is not None else default_dt(tube)
        traj, xis = _integrate_tube(tube, starts[i][None, :], T, step)
        nodes, w, clen = _close_in_tube(tube, traj[:, 0, :], xis[:, 0], detour=detour)
        curves.append(nodes)
        windings.append(w)
        lengths.append(clen)
    return OrbitTriple(
        curves, tuple(windings), float(T), tuple(lengths),
        np.asarray(starts, dtype=float),
    )


class VortexFlow:
    """Compactly supported divergence-free vortex: g(|r|^2) * (omega x r).

    The radial factor makes the divergence vanish identically, so the
    time-t flow map is volume preserving for every t.
    """

    def __init__(self, center, omega, radius):
        self.center = np.asarray(center, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        self.radius = float(radius)

    def eval(self, q):
        r = np.asarray(q, dtype=float) - self.center
        x = np.einsum("...i,...i->...", r, r) / self.radius ** 2
        g = 1.0 - smoothstep5(x)
        return g[..., None] * np.cross(self.omega, r)

    def flow(self, points, time=1.0, steps=64):
        q = np.asarray(points, dtype=float).copy()
        h = time / steps
        for _ in range(steps):
            k1 = self.eval(q)
            k2 = self.eval(q + 0.5 * h * k1)
            k3 = self.eval(q + 0.5 * h * k2)
            k4 = self.eval(q + h * k3)
            q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return q


def transport_polylines(flow, polylines, time=1.0, steps=64):
    """Push closed polylines through a flow map (frozen-in transport)."""
    return [flow.flow(nodes, time=time, steps=steps) for nodes in polylines]
