"""Torus-to-sphere maps of links and their sampling on periodic grids.

gauss_map sends a 2-component link to the unit direction between chart
points; conf_map3 sends a 3-component link to the unit direction between the
two left-translated partner curves, as seen from the first component.  Both
are sampled on uniform periodic grids with an undersampling flag based on
per-cell angular variation.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .curves import Curve, TWO_PI
from .errors import ComponentsIntersect, InputOutputError, UnresolvablePole

MIN_DISTANCE = 1e-6  # chord-distance gate for intersecting components
# chart evaluability margin on 1 - w of a left-translated product; covers the
# projection's own pole guard
POLE_MARGIN_1MW = 1e-9
CELL_FLAG_ANGLE = np.pi / 2

_SHIFTS2 = ((1, 0), (0, 1), (1, 1))
_SHIFTS3 = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1))


def min_chord_distance(c1, c2, n=256):
    th = np.arange(n) * (TWO_PI / n)
    p1 = c1.point(th)
    p2 = c2.point(th)
    d2 = np.sum((p1[:, None, :] - p2[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.min()))


def left_translate(c, x0):
    """The curve theta -> x0^{-1} * c(theta)."""
    x0c = quat.qconj(np.asarray(x0, dtype=float))

    def point(theta):
        return quat.qmul_unit(x0c, c.point(theta))

    return Curve(point, None, c.orientation)


def _normalize_rows(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class GaussMap:
    """(s, t) -> unit direction from chart(first(s)) to chart(second(t)).

    The difference order matters: with second-minus-first the torus degree
    equals the classical double-integral linking number, because the minus
    sign from differentiating in t lands on the already negated term.
    """

    def __init__(self, c1, c2):
        if min_chord_distance(c1, c2) < MIN_DISTANCE:
            raise ComponentsIntersect("components closer than %g" % MIN_DISTANCE)
        self.link = (c1, c2)

    def eval(self, s, t):
        p = quat.stereo(self.link[0].point(s))
        q = quat.stereo(self.link[1].point(t))
        return _normalize_rows(q - p)

    def sample_values(self, n):
        th = np.arange(n) * (TWO_PI / n)
        p = quat.stereo(self.link[0].point(th))
        q = quat.stereo(self.link[1].point(th))
        return _normalize_rows(q[None, :, :] - p[:, None, :])


class ConfMap3:
    """(s, t, u) -> unit direction between the two partner curves left
    translated by the inverse of the first component.

    A whole-link rotation (right translation by a fixed unit quaternion) is
    retried from a deterministic 24-candidate list whenever any sampled
    product lands within the chart evaluability margin of the pole.
    """

    def __init__(self, c1, c2, c3, _rotation=None):
        for a, b in ((c1, c2), (c1, c3), (c2, c3)):
            if min_chord_distance(a, b) < MIN_DISTANCE:
                raise ComponentsIntersect(
                    "components closer than %g" % MIN_DISTANCE
                )
        self.link = (c1, c2, c3)
        self._rotation = _rotation

    def _points(self, c, theta):
        p = c.point(theta)
        if self._rotation is not None:
            p = quat.qmul_unit(p, self._rotation)
        return p

    def _rotated(self, g):
        return ConfMap3(*self.link, _rotation=g)

    def _margin_ok(self, *prods):
        worst = min(float(np.min(1.0 - p[..., 0])) for p in prods)
        return worst >= POLE_MARGIN_1MW

    def eval(self, s, t, u):
        """Pointwise map values; s, t, u broadcast together."""
        for attempt, g in enumerate((self._rotation,) + tuple(quat.rotation_candidates())):
            m = self if attempt == 0 else self._rotated(g)
            x = m._points(m.link[0], s)
            y = m._points(m.link[1], t)
            z = m._points(m.link[2], u)
            xc = quat.qconj(x)
            p4 = quat.qmul(xc, y)
            q4 = quat.qmul(xc, z)
            if m._margin_ok(p4, q4):
                return _normalize_rows(quat.stereo(q4) - quat.stereo(p4))
        raise UnresolvablePole(
            "no rotation among 24 candidates clears the pole margin"
        )

    def _product_charts(self, ths, tht, thu):
        """Chart images P(s,t), Q(s,u) of the translated partner curves."""
        for attempt, g in enumerate((self._rotation,) + tuple(quat.rotation_candidates())):
            m = self if attempt == 0 else self._rotated(g)
            x = m._points(m.link[0], ths)
            y = m._points(m.link[1], tht)
            z = m._points(m.link[2], thu)
            xc = quat.qconj(x)
            p4 = quat.qmul(xc[:, None, :], y[None, :, :])
            q4 = quat.qmul(xc[:, None, :], z[None, :, :])
            if m._margin_ok(p4, q4):
                return quat.stereo(p4), quat.stereo(q4)
        raise UnresolvablePole(
            "no rotation among 24 candidates clears the pole margin"
        )

    def sample_values(self, ns, nt=None, nu=None):
        nt = ns if nt is None else nt
        nu = ns if nu is None else nu
        P, Q = self._product_charts(
            np.arange(ns) * (TWO_PI / ns),
            np.arange(nt) * (TWO_PI / nt),
            np.arange(nu) * (TWO_PI / nu),
        )
        return _normalize_rows(Q[:, None, :, :] - P[:, :, None, :])

    def sample_restricted(self, axis, n, fixed=0.0):
        """Values of the restriction to a coordinate 2-subtorus.

        axis 0 fixes s (grid over (t, u)), axis 1 fixes t (grid over (s, u)),
        axis 2 fixes u (grid over (s, t)).
        """
        th = np.arange(n) * (TWO_PI / n)
        fx = np.full(1, fixed)
        if axis == 0:
            v = self.eval(fx[:, None], th[:, None], th[None, :])
        elif axis == 1:
            v = self.eval(th[:, None], fx[None, :], th[None, :])
        elif axis == 2:
            v = self.eval(th[:, None], th[None, :], fx[None, :])
        else:
            raise ValueError("axis must be 0, 1 or 2")
        return v


@dataclass
class GridField2:
    """Map samples on an n x n periodic grid with undersampling diagnostics."""

    values: np.ndarray  # (n, n, 3)
    n: int
    undersampled: bool
    max_cell_angle: float


@dataclass
class GridField3:
    """Map samples on an ns x nt x nu periodic grid."""

    values: np.ndarray  # (ns, nt, nu, 3)
    shape: tuple
    undersampled: bool
    max_cell_angle: float
    source: object = field(default=None, repr=False)

    @property
    def n(self):
        return self.shape[0]


def cell_variation(values, shifts):
    """Largest angle between a cell's base corner and its other corners."""
    worst = 1.0
    for sh in shifts:
        rolled = values
        for ax, k in enumerate(sh):
            if k:
                rolled = np.roll(rolled, -k, axis=ax)
        dots = np.sum(values * rolled, axis=-1)
        worst = min(worst, float(dots.min()))
    return float(np.arccos(np.clip(worst, -1.0, 1.0)))


def sample_on_grid(m, n):
    """Sample a GaussMap or ConfMap3 at theta_j = 2*pi*j/n per axis.

    n must be even and at least 8.  The undersampling flag is set when any
    grid cell varies by more than pi/2.
    """
    n = int(n)
    if n < 8 or n % 2:
        raise ValueError("grid size must be even and >= 8")
    if isinstance(m, GaussMap):
        vals = m.sample_values(n)
        ang = cell_variation(vals, _SHIFTS2)
        return GridField2(vals, n, ang > CELL_FLAG_ANGLE, ang)
    if isinstance(m, ConfMap3):
        vals = m.sample_values(n)
        ang = cell_variation(vals, _SHIFTS3)
        return GridField3(vals, (n, n, n), ang > CELL_FLAG_ANGLE, ang, source=m)
    raise TypeError("expected GaussMap or ConfMap3")


def gauss_map(c1, c2):
    return GaussMap(c1, c2)


def conf_map3(c1, c2, c3):
    return ConfMap3(c1, c2, c3)


MAGIC_FIELD = b"MU3G"
MAGIC_FORM = b"MU3F"
_AXES = b"stu"
_VERSION = 1


def write_field3(path, f, magic=MAGIC_FIELD):
    """Binary container: magic, version u32, n u32, axis tag 'stu', then
    n^3 little-endian f64 triples in C order (s outermost, component last)."""
    vals = f.values if hasattr(f, "values") else np.asarray(f)
    ns, nt, nu = vals.shape[:3]
    if not (ns == nt == nu):
        raise InputOutputError("container requires an isotropic grid")
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<II", _VERSION, ns))
        fh.write(_AXES)
        fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())


def read_field3(path, magic=MAGIC_FIELD, unit=True):
    """Read a container back; unit=False skips the cell-variation flag,
    which only makes sense for unit-vector samples."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != magic:
            raise InputOutputError("bad magic %r in %r" % (head, path))
        version, n = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise InputOutputError("unsupported version %d" % version)
        axes = fh.read(3)
        if axes != _AXES:
            raise InputOutputError("unexpected axis order %r" % axes)
        data = np.frombuffer(fh.read(n * n * n * 3 * 8), dtype="<f8")
        if data.size != n * n * n * 3:
            raise InputOutputError("truncated container %r" % path)
    vals = data.reshape(n, n, n, 3).astype(float)
    if not unit:
        return GridField3(vals, (n, n, n), False, 0.0)
    ang = cell_variation(vals, _SHIFTS3)
    return GridField3(vals, (n, n, n), ang > CELL_FLAG_ANGLE, ang)
