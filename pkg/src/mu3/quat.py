"""Quaternion algebra and the stereographic chart of the 3-sphere.

Quaternions are float arrays of shape (..., 4) with the scalar part first,
q = (w, x, y, z) = w + x i + y j + z k.  The chart projects from the pole
1 = (1, 0, 0, 0), sending q to (x, y, z) / (1 - w); the antipode -1 lands at
the chart origin.
"""

import numpy as np

from .errors import PoleSingularity

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])
POLE_TOL = 1e-9


def qnormalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def qconj(q):
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


# unit quaternions only: inverse == conjugate
qinv = qconj


def qmul(a, b):
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qmul_unit(a, b):
    """Product of unit quaternions, renormalized to absorb rounding drift."""
    return qnormalize(qmul(a, b))


def stereo(q, pole_tol=POLE_TOL):
    """Chart map pr(q) = (x, y, z) / (1 - w).  Undefined at the pole 1."""
    q = np.asarray(q, dtype=float)
    den = 1.0 - q[..., 0]
    if np.any(np.abs(den) < pole_tol):
        raise PoleSingularity(
            "stereographic projection within %g of the pole" % pole_tol
        )
    return q[..., 1:] / den[..., None]


def inv_stereo(p):
    """Inverse chart: p in R^3 -> ((|p|^2 - 1) + 2p) / (|p|^2 + 1) on S^3."""
    p = np.asarray(p, dtype=float)
    n2 = np.sum(p * p, axis=-1)
    den = n2 + 1.0
    out = np.empty(p.shape[:-1] + (4,), dtype=float)
    out[..., 0] = (n2 - 1.0) / den
    out[..., 1:] = 2.0 * p / den[..., None]
    return out


def rotation_candidates():
    """24 unit quaternions (binary tetrahedral group) used as deterministic
    whole-link rotations when a sampled product approaches the chart pole."""
    cands = []
    for i in range(4):
        for s in (1.0, -1.0):
            v = np.zeros(4)
            v[i] = s
            cands.append(v)
    for sw in (0.5, -0.5):
        for sx in (0.5, -0.5):
            for sy in (0.5, -0.5):
                for sz in (0.5, -0.5):
                    cands.append(np.array([sw, sx, sy, sz]))
    return np.array(cands)
