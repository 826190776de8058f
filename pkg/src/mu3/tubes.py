"""Solid-torus tube fields around planar elliptical cores.

Each field is phi0 * psi(rho/R) * tangent(xi) in tube coordinates
(xi, rho, phi) built from the planar frame of the core: rho and phi are
first integrals of the field, so orbits stay on parallel circles of the
core and the field is divergence free in the exact (continuum) sense.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import EmbeddingFailed, TubesOverlap

TWO_PI = 2.0 * np.pi
CLEARANCE = 0.05
PLATEAU_R0 = 0.6


def smoothstep5(x):
    """Quintic step: 0 below 0, 1 above 1, C^2 join at both ends."""
    y = np.clip(x, 0.0, 1.0)
    return y * y * y * (10.0 + y * (-15.0 + 6.0 * y))


class PlateauBump:
    """Radial profile: 1 on [0, r0], quintic roll-off to 0 at 1."""

    def __init__(self, r0=PLATEAU_R0):
        self.r0 = r0
        self.moment1 = quad(lambda u: self(u) * u, 0.0, 1.0, limit=200)[0]
        self.moment2 = quad(lambda u: self(u) ** 2 * u, 0.0, 1.0, limit=200)[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - smoothstep5((x - self.r0) / (1.0 - self.r0))


class EllipseCore:
    """Closed planar ellipse center + a cos(xi) u + b sin(xi) v."""

    def __init__(self, center, u_axis, v_axis, a, b):
        self.center = np.asarray(center, dtype=float)
        self.u_axis = np.asarray(u_axis, dtype=float)
        self.v_axis = np.asarray(v_axis, dtype=float)
        self.a = float(a)
        self.b = float(b)
        self.w_axis = np.cross(self.u_axis, self.v_axis)
        self.length = quad(lambda t: float(self.speed(t)), 0.0, TWO_PI, limit=400)[0]

    def point(self, xi):
        xi = np.asarray(xi, dtype=float)
        return (
            self.center
            + self.a * np.cos(xi)[..., None] * self.u_axis
            + self.b * np.sin(xi)[..., None] * self.v_axis
        )

    def deriv(self, xi):
        xi = np.asarray(xi, dtype=float)
        return (
            -self.a * np.sin(xi)[..., None] * self.u_axis
            + self.b * np.cos(xi)[..., None] * self.v_axis
        )

    def speed(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.sqrt(
            self.a ** 2 * np.sin(xi) ** 2 + self.b ** 2 * np.cos(xi) ** 2
        )

    def tangent(self, xi):
        return self.deriv(xi) / self.speed(xi)[..., None]

    def curvature(self, xi):
        xi = np.asarray(xi, dtype=float)
        den = self.a ** 2 * np.sin(xi) ** 2 + self.b ** 2 * np.cos(xi) ** 2
        return self.a * self.b / den ** 1.5

    def normal(self, xi):
        """In-plane normal pointing toward the center of curvature."""
        return np.cross(self.w_axis, self.tangent(xi))

    @property
    def max_curvature(self):
        return max(self.a / self.b ** 2, self.b / self.a ** 2)

    def nearest_xi(self, points, warm=None):
        """Parameter of the closest core point; Newton from a warm start
        or from the angular guess atan2(beta/b, alpha/a)."""
        q = np.asarray(points, dtype=float) - self.center
        alpha = q @ self.u_axis
        beta = q @ self.v_axis
        if warm is None:
            xi = np.arctan2(beta / self.b, alpha / self.a)
        else:
            xi = np.array(warm, dtype=float, copy=True)
        for _ in range(12):
            c = np.cos(xi)
            s = np.sin(xi)
            f = (alpha - self.a * c) * self.a * s - (beta - self.b * s) * self.b * c
            fp = (
                self.a * c * (alpha - self.a * c)
                + self.a ** 2 * s * s
                + self.b * s * (beta - self.b * s)
                + self.b ** 2 * c * c
            )
            step = f / fp
            xi = xi - np.clip(step, -0.5, 0.5)
            if np.max(np.abs(step)) < 1e-13:
                break
        return xi

    def coords(self, points, warm=None):
        """Tube coordinates (xi, rho, phi) of ambient points."""
        xi = self.nearest_xi(points, warm=warm)
        d = np.asarray(points, dtype=float) - self.point(xi)
        cn = np.einsum("...i,...i->...", d, self.normal(xi))
        cw = d @ self.w_axis
        rho = np.hypot(cn, cw)
        phi = np.arctan2(cw, cn)
        return xi, rho, phi

    def from_coords(self, xi, rho, phi):
        xi = np.asarray(xi, dtype=float)
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        return (
            self.point(xi)
            + (rho * np.cos(phi))[..., None] * self.normal(xi)
            + (rho * np.sin(phi))[..., None] * self.w_axis
        )


@dataclass
class TubeField:
    core: EllipseCore
    radius: float
    flux: float
    profile: PlateauBump = field(default_factory=PlateauBump)

    def __post_init__(self):
        self.phi0 = self.flux / (TWO_PI * self.radius ** 2 * self.profile.moment1)

    def eval(self, points, warm=None):
        """Field value and the core parameter used (for warm restarts)."""
        xi, rho, phi = self.core.coords(points, warm=warm)
        amp = np.where(
            rho < self.radius, self.phi0 * self.profile(rho / self.radius), 0.0
        )
        return amp[..., None] * self.core.tangent(xi), xi

    def period(self, rho, phi):
        """Closed-orbit period on the parallel circle through (rho, phi)."""
        amp = self.phi0 * self.profile(np.asarray(rho) / self.radius)
        return (self.core.length - TWO_PI * np.asarray(rho) * np.cos(phi)) / amp

    @property
    def tau_min(self):
        if self.phi0 == 0.0:
            return np.inf
        return (self.core.length - TWO_PI * PLATEAU_R0 * self.radius) / abs(self.phi0)

    @property
    def volume(self):
        return np.pi * self.radius ** 2 * self.core.length

    @property
    def energy(self):
        return (
            self.phi0 ** 2
            * TWO_PI
            * self.core.length
            * self.radius ** 2
            * self.profile.moment2
        )

    def contains(self, points):
        _, rho, _ = self.core.coords(points)
        return rho < self.radius

    def sample_uniform(self, rng, count):
        """Rejection sampling against the core bounding box padded by R."""
        lo, hi = self.bbox
        out = np.empty((count, 3))
        have = 0
        while have < count:
            cand = rng.uniform(lo, hi, size=(4 * count, 3))
            _, rho, _ = self.core.coords(cand)
            keep = cand[rho < self.radius]
            take = min(count - have, keep.shape[0])
            out[have : have + take] = keep[:take]
            have += take
        return out

    @property
    def bbox(self):
        xi = np.linspace(0.0, TWO_PI, 256, endpoint=False)
        pts = self.core.point(xi)
        return pts.min(axis=0) - self.radius, pts.max(axis=0) + self.radius


def min_core_distance(c1, c2, n=512):
    p1 = c1.point(np.linspace(0.0, TWO_PI, n, endpoint=False))
    p2 = c2.point(np.linspace(0.0, TWO_PI, n, endpoint=False))
    d = p1[:, None, :] - p2[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", d, d)).min())


class TubeSystem:
    """Disjoint solid-torus fields; validates embedding before overlap."""

    def __init__(self, tubes, core_mu123=None, clearance=CLEARANCE):
        self.tubes = list(tubes)
        self.core_mu123 = core_mu123
        for k, tube in enumerate(self.tubes):
            xi = np.linspace(0.0, TWO_PI, 512, endpoint=False)
            reach = 1.0 / float(tube.core.curvature(xi).max())
            if tube.radius > reach:
                raise EmbeddingFailed(
                    "tube %d radius %.3f exceeds curvature reach %.3f"
                    % (k + 1, tube.radius, reach)
                )
        for i in range(len(self.tubes)):
            for j in range(i + 1, len(self.tubes)):
                gap = min_core_distance(self.tubes[i].core, self.tubes[j].core)
                need = self.tubes[i].radius + self.tubes[j].radius + clearance
                if not gap > need:
                    raise TubesOverlap(
                        "cores %d,%d separated by %.3f, need > %.3f"
                        % (i + 1, j + 1, gap, need)
                    )

    @property
    def fluxes(self):
        return tuple(t.flux for t in self.tubes)

    def eval(self, points):
        points = np.asarray(points, dtype=float)
        total = np.zeros_like(points)
        for tube in self.tubes:
            total += tube.eval(points)[0]
        return total


class VectorFieldSpec:
    """Field facade: evaluation, the supporting tube system, and a measured
    divergence residual.

    The residual is h * max|div_h B| with h = radius/64 central differences
    at uniform in-tube sample points.  The step factor makes it comparable
    to the field's sup norm: the raw finite-difference divergence of any
    compactly supported C^2 profile carries an irreducible 1/h-scale
    truncation term, so no smooth construction can bound |div_h| itself by
    a small multiple of sup|B|.
    """

    def __init__(self, system, samples=160, seed=0):
        self.support = system
        rng = np.random.default_rng(seed)
        worst = 0.0
        sup = 0.0
        for tube in system.tubes:
            sup = max(sup, abs(tube.phi0))
            if tube.phi0 == 0.0:
                continue
            h = tube.radius / 64.0
            pts = tube.sample_uniform(rng, samples)
            div = np.zeros(len(pts))
            for ax in range(3):
                e = np.zeros(3)
                e[ax] = h
                div += (self.eval(pts + e) - self.eval(pts - e))[:, ax] / (2.0 * h)
            worst = max(worst, h * float(np.abs(div).max()))
        self.divergence_residual = worst
        self.field_sup = sup

    def eval(self, points):
        return self.support.eval(points)

    @property
    def tubes(self):
        return self.support.tubes

    @property
    def fluxes(self):
        return self.support.fluxes

    @property
    def core_mu123(self):
        return self.support.core_mu123

    def tangency_residual(self, shell=1e-2, samples=64, seed=0):
        """Worst |radial component| / |field| on the inner boundary shell."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for tube in self.tubes:
            if tube.phi0 == 0.0:
                continue
            xi = rng.uniform(0.0, TWO_PI, samples)
            phi = rng.uniform(0.0, TWO_PI, samples)
            rho = tube.radius * rng.uniform(1.0 - shell, 1.0, samples)
            pts = tube.core.from_coords(xi, rho, phi)
            B, xis = tube.eval(pts)
            d = pts - tube.core.point(xis)
            radial = np.abs(np.einsum("ij,ij->i", B, d)) / np.linalg.norm(d, axis=1)
            mag = np.linalg.norm(B, axis=1)
            ok = mag > 0
            if np.any(ok):
                worst = max(worst, float((radial[ok] / mag[ok]).max()))
        return worst


def _borromean_cores(a=1.0, b=0.5):
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    zero = np.zeros(3)
    return [
        EllipseCore(zero, ex, ey, a, b),
        EllipseCore(zero, ey, ez, a, b),
        # third core reversed so the closed cores carry the +1 invariant
        EllipseCore(zero, ez, -ex, a, b),
    ]


def build_borromean_tubes(radius, fluxes):
    cores = _borromean_cores()
    tubes = [TubeField(c, radius, f) for c, f in zip(cores, fluxes)]
    system = TubeSystem(tubes, core_mu123=1)
    return system, VectorFieldSpec(system)


def build_hopf_tubes(radius, fluxes):
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    c1 = EllipseCore(np.zeros(3), ex, ey, 1.0, 1.0)
    # second circle passes through the first one's center, gap exactly 1;
    # oriented so the pair links positively
    c2 = EllipseCore(ex, ex, -ez, 1.0, 1.0)
    tubes = [TubeField(c, radius, f) for c, f in zip([c1, c2], fluxes)]
    system = TubeSystem(tubes)
    return system, VectorFieldSpec(system)
