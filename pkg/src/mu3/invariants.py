"""User-facing invariant pipelines.

Every result carries the raw real value, its integer rounding, the residual
between them, the grid used, and diagnostic flags.  A residual of 0.25 or
more marks the result indeterminate.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .forms import (
    degree_scale_means,
    integrate_alpha_wedge_omega,
    integrate_form2_on_t2,
    pullback_area_form,
    pullback_area_form_t2,
    solve_potential,
)
from .maps import (
    CELL_FLAG_ANGLE,
    ConfMap3,
    GaussMap,
    GridField2,
    GridField3,
    _SHIFTS2,
    cell_variation,
    sample_on_grid,
)

DEFAULT_N2 = 256
DEFAULT_N3 = 48
INDETERMINATE_RESIDUAL = 0.25


@dataclass
class InvariantResult:
    raw: float
    rounded: int
    residual: float
    grid_n: int
    flags: dict = dc_field(default_factory=dict)

    @classmethod
    def from_raw(cls, raw, grid_n, **flags):
        rounded = int(np.rint(raw))
        residual = abs(raw - rounded)
        flags = dict(flags)
        if residual >= INDETERMINATE_RESIDUAL:
            flags["indeterminate"] = True
        return cls(raw, rounded, residual, grid_n, flags)

    def to_dict(self):
        return {
            "raw": self.raw,
            "rounded": self.rounded,
            "residual": self.residual,
            "grid_n": self.grid_n,
            "flags": dict(self.flags),
        }


def _components(link):
    if hasattr(link, "components"):
        return tuple(link.components)
    return tuple(link)


def linking_number(link, n=DEFAULT_N2):
    """Degree of the two-component direction map on the n x n grid."""
    c1, c2 = _components(link)
    g = sample_on_grid(GaussMap(c1, c2), n)
    raw = integrate_form2_on_t2(pullback_area_form_t2(g))
    return InvariantResult.from_raw(raw, n, undersampled=g.undersampled)


def _conf_map(link):
    c1, c2, c3 = _components(link)
    return ConfMap3(c1, c2, c3)


def hopf_degree(link, n=DEFAULT_N3):
    """The pairing integral of the 3-torus map: potential against pullback.

    Requires all pairwise degrees to vanish (gated through the harmonic
    means); twice the triple linking invariant.
    """
    m = link if isinstance(link, ConfMap3) else _conf_map(link)
    g = sample_on_grid(m, n)
    omega = pullback_area_form(g)
    alpha = solve_potential(omega)  # raises NotExact on nonzero pairwise lk
    raw = integrate_alpha_wedge_omega(alpha, omega)
    return InvariantResult.from_raw(
        raw,
        n,
        undersampled=g.undersampled,
        max_cell_angle=g.max_cell_angle,
        pairwise_means=tuple(degree_scale_means(omega)),
    )


def mu123(link, n=DEFAULT_N3):
    """Triple linking invariant: half the pairing integral, rounded."""
    h = hopf_degree(link, n)
    res = InvariantResult.from_raw(h.raw / 2.0, n, **h.flags)
    return res


def subtorus_degrees(link, n=DEFAULT_N2, fixed=0.0):
    """Degrees of the three coordinate 2-subtorus restrictions.

    Restriction k fixes the k-th parameter at `fixed` and integrates the
    pulled-back area form over the remaining two axes; each matches the
    linking number of the corresponding pair up to sign.
    """
    m = link if isinstance(link, ConfMap3) else _conf_map(link)
    out = []
    for axis in range(3):
        vals = m.sample_restricted(axis, n, fixed)
        ang = cell_variation(vals, _SHIFTS2)
        g = GridField2(vals, n, ang > CELL_FLAG_ANGLE, ang)
        raw = integrate_form2_on_t2(pullback_area_form_t2(g))
        out.append(InvariantResult.from_raw(raw, n, undersampled=g.undersampled))
    return tuple(out)
