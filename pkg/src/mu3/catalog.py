"""Reference links.

All catalog geometry is written in the R^3 chart and lifted to S^3 with
analytic derivatives.  Pairwise linking values and the triple invariant
stored on each entry follow this package's orientation conventions (signs
are flipped by reversing any single component).
"""

from dataclasses import dataclass

import numpy as np

from .curves import lift_chart
from .errors import UnknownLink

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class LinkCatalogEntry:
    name: str
    components: tuple
    expected_pairwise_lk: tuple  # (lk12, lk13, lk23)
    expected_mu123: object  # int, or "undefined" when pairwise lk != 0


def _ellipse(u, v, a, b, center=None):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)

    def fn(th):
        th = np.asarray(th, dtype=float)
        return (
            np.multiply.outer(a * np.cos(th), u)
            + np.multiply.outer(b * np.sin(th), v)
            + c
        )

    def dfn(th):
        th = np.asarray(th, dtype=float)
        return np.multiply.outer(-a * np.sin(th), u) + np.multiply.outer(
            b * np.cos(th), v
        )

    return lift_chart(fn, dfn)


def _circle(center, radius, u, v):
    return _ellipse(u, v, radius, radius, center)


def _borromean_components(a=1.0, b=0.5):
    # three congruent ellipses in mutually perpendicular coordinate planes
    return (
        _ellipse(_EX, _EY, a, b),
        _ellipse(_EY, _EZ, a, b),
        _ellipse(_EZ, _EX, a, b),
    )


def _hopf_pair():
    # unit circle in the xy-plane and a unit circle through its center,
    # minimum mutual distance 1; the second circle threads the first's
    # spanning disc upward, which makes the pair a positive Hopf link
    c1 = _circle((0.0, 0.0, 0.0), 1.0, _EX, _EY)
    c2 = _circle((1.0, 0.0, 0.0), 1.0, _EX, (0.0, 0.0, -1.0))
    return c1, c2


def _far_unknot():
    return _circle((4.0, 0.0, 0.0), 0.3, _EX, _EY)


def catalog(name, twist=None):
    """Look up a reference link by name.

    Names: unlink3, hopf_plus_unknot, borromean, borromean_n (with the twist
    argument, or inline as "borromean_n(3)"), split_hopf.
    """
    if name.startswith("borromean_n"):
        inner = name[len("borromean_n"):]
        if inner.startswith("(") and inner.endswith(")"):
            twist = int(inner[1:-1])
        if twist is None:
            raise UnknownLink("borromean_n requires a twist count")
        base = _borromean_components()
        comps = (base[0].covered(int(twist)), base[1], base[2])
        return LinkCatalogEntry(
            name="borromean_n(%d)" % twist,
            components=comps,
            expected_pairwise_lk=(0, 0, 0),
            expected_mu123=-int(twist),
        )

    if name == "borromean":
        return LinkCatalogEntry(
            name=name,
            components=_borromean_components(),
            expected_pairwise_lk=(0, 0, 0),
            expected_mu123=-1,
        )

    if name == "unlink3":
        comps = (
            _circle((0.0, 0.0, 0.0), 0.18, _EX, _EY),
            _circle((3.0, 0.0, 0.0), 0.18, _EY, _EZ),
            _circle((0.0, 3.0, 0.0), 0.18, _EZ, _EX),
        )
        return LinkCatalogEntry(
            name=name,
            components=comps,
            expected_pairwise_lk=(0, 0, 0),
            expected_mu123=0,
        )

    if name == "hopf_plus_unknot":
        h1, h2 = _hopf_pair()
        return LinkCatalogEntry(
            name=name,
            components=(_far_unknot(), h1, h2),
            expected_pairwise_lk=(0, 0, 1),
            expected_mu123="undefined",
        )

    if name == "split_hopf":
        h1, h2 = _hopf_pair()
        return LinkCatalogEntry(
            name=name,
            components=(h1, h2, _far_unknot()),
            expected_pairwise_lk=(1, 0, 0),
            expected_mu123="undefined",
        )

    raise UnknownLink("no catalog link named %r" % name)


CATALOG_NAMES = ("unlink3", "hopf_plus_unknot", "borromean", "borromean_n", "split_hopf")
