"""Closed parametrized curves on the 3-sphere and their serialization."""

import json

import numpy as np

from . import quat
from .errors import InputOutputError

TWO_PI = 2.0 * np.pi
# step for the finite-difference fallback derivative
_FD_STEP = TWO_PI / 4096.0


class Curve:
    """Closed curve theta in [0, 2pi) -> unit quaternion on S^3.

    point() accepts scalar or array angles and returns (..., 4) points.
    deriv() returns the tangent 4-vector; when no analytic derivative is
    supplied it falls back to 4th-order central differences.
    """

    def __init__(self, point_fn, deriv_fn=None, orientation=1):
        self._point = point_fn
        self._deriv = deriv_fn
        self.orientation = orientation

    def point(self, theta):
        return self._point(np.asarray(theta, dtype=float))

    def deriv(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self._deriv is not None:
            return self._deriv(theta)
        h = _FD_STEP
        p = self._point
        return (
            8.0 * (p(theta + h) - p(theta - h)) - (p(theta + 2 * h) - p(theta - 2 * h))
        ) / (12.0 * h)

    def reversed(self):
        pf = self._point
        df = self._deriv
        rd = None if df is None else (lambda th: -df(-np.asarray(th, dtype=float)))
        return Curve(
            lambda th: pf(-np.asarray(th, dtype=float)), rd, -self.orientation
        )

    def shifted(self, delta):
        """Same curve with the parameter origin moved by delta."""
        pf = self._point
        df = self._deriv
        sd = None if df is None else (lambda th: df(np.asarray(th, dtype=float) + delta))
        return Curve(lambda th: pf(np.asarray(th, dtype=float) + delta), sd, self.orientation)

    def covered(self, n):
        """The n-fold cover theta -> point(n * theta)."""
        pf = self._point
        df = self._deriv
        cd = None if df is None else (lambda th: n * df(n * np.asarray(th, dtype=float)))
        return Curve(lambda th: pf(n * np.asarray(th, dtype=float)), cd, self.orientation)


def lift_chart(fn3, dfn3=None, orientation=1):
    """Lift a closed R^3 chart parametrization to S^3.

    fn3(theta) -> (..., 3) chart points; dfn3 optional analytic derivative.
    The lifted derivative applies the chain rule through the inverse chart.
    """

    def point(theta):
        return quat.inv_stereo(fn3(theta))

    deriv = None
    if dfn3 is not None:

        def deriv(theta):
            p = np.asarray(fn3(theta), dtype=float)
            dp = np.asarray(dfn3(theta), dtype=float)
            n2 = np.sum(p * p, axis=-1)
            den = n2 + 1.0
            pdot = np.sum(p * dp, axis=-1)
            out = np.empty(p.shape[:-1] + (4,), dtype=float)
            out[..., 0] = 4.0 * pdot / den**2
            out[..., 1:] = 2.0 * dp / den[..., None] - (
                4.0 * pdot / den**2
            )[..., None] * p
            return out

    return Curve(point, deriv, orientation)


class PolyCurve(Curve):
    """Closed polyline in the R^3 chart, linear between nodes, lifted to S^3.

    Node j sits at parameter 2*pi*j/N; the segment N-1 -> 0 closes the loop.
    """

    def __init__(self, nodes):
        nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
        if nodes.shape[-1] != 3:
            raise ValueError("PolyCurve nodes must be (N, 3) chart points")
        # drop an explicitly repeated closing node
        if len(nodes) > 1 and np.allclose(nodes[0], nodes[-1], atol=1e-14):
            nodes = nodes[:-1]
        self.nodes = nodes
        n = len(nodes)

        def fn3(theta):
            x = np.mod(np.asarray(theta, dtype=float), TWO_PI) * (n / TWO_PI)
            i0 = np.floor(x).astype(int) % n
            f = (x - np.floor(x))[..., None]
            return nodes[i0] * (1.0 - f) + nodes[(i0 + 1) % n] * f

        self._fn3 = fn3
        super().__init__(lambda th: quat.inv_stereo(fn3(th)))

    def chart(self, theta):
        return self._fn3(theta)


class ReparamCurve(Curve):
    """Precomposition of a curve with a degree-1 circle diffeomorphism.

    theta_nodes: strictly increasing table of the diffeo on [0, 2pi],
    theta_nodes[0] = base parameter at 0, mapped by linear interpolation.
    """

    def __init__(self, base, phi_grid, theta_grid):
        self.base = base
        phi_grid = np.asarray(phi_grid, dtype=float)
        theta_grid = np.asarray(theta_grid, dtype=float)

        def point(phi):
            phi = np.mod(np.asarray(phi, dtype=float), TWO_PI)
            th = np.interp(phi, phi_grid, theta_grid)
            return base.point(th)

        super().__init__(point, None, base.orientation)


def sample_curve(curve, n):
    """Points of the curve at angles 2*pi*j/n, shape (n, 4)."""
    return curve.point(np.arange(n) * (TWO_PI / n))


def write_link_json(path, curves, name="link", n=512):
    """Serialize a link as {name, n_components, N, samples} with unit
    quaternion samples taken at 2*pi*j/N per component."""
    doc = {
        "name": name,
        "n_components": len(curves),
        "N": int(n),
        "samples": [np.round(sample_curve(c, n), 15).tolist() for c in curves],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_link_json(path):
    """Load a link document written by write_link_json.

    Components are rebuilt by periodic linear interpolation of the stored
    samples (renormalized onto S^3).
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
        n = int(doc["N"])
        ncomp = int(doc["n_components"])
        samples = doc["samples"]
        if len(samples) != ncomp:
            raise KeyError("samples")
        curves = []
        for comp in samples:
            pts = np.asarray(comp, dtype=float)
            if pts.shape != (n, 4):
                raise KeyError("samples")
            curves.append(_interp_curve(pts))
        return curves, doc.get("name", "link")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputOutputError("bad link document %r: %s" % (path, exc)) from exc


def _interp_curve(pts):
    n = len(pts)

    def point(theta):
        x = np.mod(np.asarray(theta, dtype=float), TWO_PI) * (n / TWO_PI)
        i0 = np.floor(x).astype(int) % n
        f = (x - np.floor(x))[..., None]
        raw = pts[i0] * (1.0 - f) + pts[(i0 + 1) % n] * f
        return quat.qnormalize(raw)

    return Curve(point)
