"""Compiled inner loops: fused grid pullback and polyline linking.

The pullback kernel consumes the two product charts P(s,t) and Q(s,u)
and emits the three pulled-back component grids without materializing
the full direction field, recomputing unit directions at the 13 stencil
points and 4 extra cube corners it needs per output point.  Serial on
purpose: replayed runs must be bit-identical.
"""

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi


@njit(cache=True, fastmath=True, inline="always")
def _unitdiff(qx, qy, qz, px, py, pz):
    dx = qx - px
    dy = qy - py
    dz = qz - pz
    inv = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
    return dx * inv, dy * inv, dz * inv


@njit(cache=True, fastmath=True)
def fused_pullback(P, Q):
    """Pull back the sphere area form through (s,t,u) -> unit(Q(s,u)-P(s,t)).

    Returns (W, min_dot): W has shape (3, ns, nt, nu) in float32 with the
    1/(4 pi) normalization folded in, min_dot is the worst cosine between
    a cell's base corner and its other seven corners.
    """
    ns, nt = P.shape[0], P.shape[1]
    nu = Q.shape[1]
    W = np.empty((3, ns, nt, nu), dtype=np.float32)
    ds = 1.0 / (12.0 * (TWO_PI / ns))
    dt = 1.0 / (12.0 * (TWO_PI / nt))
    du = 1.0 / (12.0 * (TWO_PI / nu))
    min_dot = 1.0
    for i in range(ns):
        i1 = (i + 1) % ns
        i2 = (i + 2) % ns
        i3 = (i - 1) % ns
        i4 = (i - 2) % ns
        for j in range(nt):
            j1 = (j + 1) % nt
            j2 = (j + 2) % nt
            j3 = (j - 1) % nt
            j4 = (j - 2) % nt
            px = P[i, j, 0]
            py = P[i, j, 1]
            pz = P[i, j, 2]
            for k in range(nu):
                k1 = (k + 1) % nu
                k2 = (k + 2) % nu
                k3 = (k - 1) % nu
                k4 = (k - 2) % nu
                qx = Q[i, k, 0]
                qy = Q[i, k, 1]
                qz = Q[i, k, 2]
                fx, fy, fz = _unitdiff(qx, qy, qz, px, py, pz)

                ax, ay, az = _unitdiff(Q[i1, k, 0], Q[i1, k, 1], Q[i1, k, 2],
                                       P[i1, j, 0], P[i1, j, 1], P[i1, j, 2])
                bx, by, bz = _unitdiff(Q[i2, k, 0], Q[i2, k, 1], Q[i2, k, 2],
                                       P[i2, j, 0], P[i2, j, 1], P[i2, j, 2])
                cx, cy, cz = _unitdiff(Q[i3, k, 0], Q[i3, k, 1], Q[i3, k, 2],
                                       P[i3, j, 0], P[i3, j, 1], P[i3, j, 2])
                ex, ey, ez = _unitdiff(Q[i4, k, 0], Q[i4, k, 1], Q[i4, k, 2],
                                       P[i4, j, 0], P[i4, j, 1], P[i4, j, 2])
                sx = (ex - 8.0 * cx + 8.0 * ax - bx) * ds
                sy = (ey - 8.0 * cy + 8.0 * ay - by) * ds
                sz = (ez - 8.0 * cz + 8.0 * az - bz) * ds
                d1 = fx * ax + fy * ay + fz * az

                ax, ay, az = _unitdiff(qx, qy, qz,
                                       P[i, j1, 0], P[i, j1, 1], P[i, j1, 2])
                bx, by, bz = _unitdiff(qx, qy, qz,
                                       P[i, j2, 0], P[i, j2, 1], P[i, j2, 2])
                cx, cy, cz = _unitdiff(qx, qy, qz,
                                       P[i, j3, 0], P[i, j3, 1], P[i, j3, 2])
                ex, ey, ez = _unitdiff(qx, qy, qz,
                                       P[i, j4, 0], P[i, j4, 1], P[i, j4, 2])
                tx = (ex - 8.0 * cx + 8.0 * ax - bx) * dt
                ty = (ey - 8.0 * cy + 8.0 * ay - by) * dt
                tz = (ez - 8.0 * cz + 8.0 * az - bz) * dt
                d2 = fx * ax + fy * ay + fz * az

                ax, ay, az = _unitdiff(Q[i, k1, 0], Q[i, k1, 1], Q[i, k1, 2],
                                       px, py, pz)
                bx, by, bz = _unitdiff(Q[i, k2, 0], Q[i, k2, 1], Q[i, k2, 2],
                                       px, py, pz)
                cx, cy, cz = _unitdiff(Q[i, k3, 0], Q[i, k3, 1], Q[i, k3, 2],
                                       px, py, pz)
                ex, ey, ez = _unitdiff(Q[i, k4, 0], Q[i, k4, 1], Q[i, k4, 2],
                                       px, py, pz)
                ux = (ex - 8.0 * cx + 8.0 * ax - bx) * du
                uy = (ey - 8.0 * cy + 8.0 * ay - by) * du
                uz = (ez - 8.0 * cz + 8.0 * az - bz) * du
                d3 = fx * ax + fy * ay + fz * az

                # cross products of the three derivative vectors
                W[0, i, j, k] = (
                    fx * (ty * uz - tz * uy)
                    + fy * (tz * ux - tx * uz)
                    + fz * (tx * uy - ty * ux)
                ) / FOUR_PI
                W[1, i, j, k] = (
                    fx * (uy * sz - uz * sy)
                    + fy * (uz * sx - ux * sz)
                    + fz * (ux * sy - uy * sx)
                ) / FOUR_PI
                W[2, i, j, k] = (
                    fx * (sy * tz - sz * ty)
                    + fy * (sz * tx - sx * tz)
                    + fz * (sx * ty - sy * tx)
                ) / FOUR_PI

                # cell-corner variation: the three axis corners, then the
                # four diagonal corners of the forward cube
                ax, ay, az = _unitdiff(Q[i1, k, 0], Q[i1, k, 1], Q[i1, k, 2],
                                       P[i1, j1, 0], P[i1, j1, 1], P[i1, j1, 2])
                d4 = fx * ax + fy * ay + fz * az
                ax, ay, az = _unitdiff(Q[i1, k1, 0], Q[i1, k1, 1], Q[i1, k1, 2],
                                       P[i1, j, 0], P[i1, j, 1], P[i1, j, 2])
                d5 = fx * ax + fy * ay + fz * az
                ax, ay, az = _unitdiff(Q[i, k1, 0], Q[i, k1, 1], Q[i, k1, 2],
                                       P[i, j1, 0], P[i, j1, 1], P[i, j1, 2])
                d6 = fx * ax + fy * ay + fz * az
                ax, ay, az = _unitdiff(Q[i1, k1, 0], Q[i1, k1, 1], Q[i1, k1, 2],
                                       P[i1, j1, 0], P[i1, j1, 1], P[i1, j1, 2])
                d7 = fx * ax + fy * ay + fz * az
                m = min(min(min(d1, d2), min(d3, d4)), min(min(d5, d6), d7))
                if m < min_dot:
                    min_dot = m
    return W, min_dot


@njit(cache=True, fastmath=True, inline="always")
def _tri_solid_angle(ax, ay, az, bx, by, bz, cx, cy, cz):
    la = np.sqrt(ax * ax + ay * ay + az * az)
    lb = np.sqrt(bx * bx + by * by + bz * bz)
    lc = np.sqrt(cx * cx + cy * cy + cz * cz)
    det = (
        ax * (by * cz - bz * cy)
        + ay * (bz * cx - bx * cz)
        + az * (bx * cy - by * cx)
    )
    den = (
        la * lb * lc
        + (ax * bx + ay * by + az * bz) * lc
        + (bx * cx + by * cy + bz * cz) * la
        + (cx * ax + cy * ay + cz * az) * lb
    )
    return 2.0 * np.arctan2(det, den)


@njit(cache=True, fastmath=True)
def polyline_lk(A, B):
    """Gauss linking number of two closed polylines, exact per segment pair.

    Accumulates signed solid angles of the difference quadrilaterals taken
    second-minus-first so the total matches the classical double-integral
    sign convention.
    """
    na = A.shape[0]
    nb = B.shape[0]
    total = 0.0
    for i in range(na):
        i1 = (i + 1) % na
        for j in range(nb):
            j1 = (j + 1) % nb
            r00x = B[j, 0] - A[i, 0]
            r00y = B[j, 1] - A[i, 1]
            r00z = B[j, 2] - A[i, 2]
            r10x = B[j, 0] - A[i1, 0]
            r10y = B[j, 1] - A[i1, 1]
            r10z = B[j, 2] - A[i1, 2]
            r11x = B[j1, 0] - A[i1, 0]
            r11y = B[j1, 1] - A[i1, 1]
            r11z = B[j1, 2] - A[i1, 2]
            r01x = B[j1, 0] - A[i, 0]
            r01y = B[j1, 1] - A[i, 1]
            r01z = B[j1, 2] - A[i, 2]
            total += _tri_solid_angle(
                r00x, r00y, r00z, r10x, r10y, r10z, r11x, r11y, r11z
            )
            total += _tri_solid_angle(
                r00x, r00y, r00z, r11x, r11y, r11z, r01x, r01y, r01z
            )
    return total / FOUR_PI
