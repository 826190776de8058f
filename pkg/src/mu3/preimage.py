"""Preimage curves of a regular sphere value under a sampled 3-torus map.

Each grid cube is split into the six path tetrahedra of the standard
simplicial subdivision (compatible across faces); inside every tetrahedron
the two transverse constraints are linear, so the preimage is a straight
segment whose endpoints lie on tetrahedron faces.  Face solutions are cached
by global (periodic) face key, which makes chains close exactly.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import BrokenChain, NotRegularValue

TWO_PI = 2.0 * np.pi
NORTH = np.array([0.0, 0.0, 1.0])
_BARY_EPS = 1e-9
_DET_EPS = 1e-13


@dataclass
class PreimageLink:
    polylines: list        # arrays (m, 3) of angles in [0, 2pi)
    homology_class: list   # one (3,) int array per polyline
    regular_value: np.ndarray
    grid_shape: tuple

    @property
    def total_class(self):
        if not self.homology_class:
            return np.zeros(3, dtype=int)
        return np.sum(np.stack(self.homology_class), axis=0)

    def to_csv(self, path):
        """Rows of s,t,u per vertex; an all-NaN row separates polylines."""
        rows = []
        for line in self.polylines:
            rows.append(line)
            rows.append(np.full((1, 3), np.nan))
        data = np.vstack(rows) if rows else np.empty((0, 3))
        np.savetxt(path, data, delimiter=",", header="s,t,u", comments="")

    def to_dict(self):
        return {
            "regular_value": self.regular_value.tolist(),
            "n_polylines": len(self.polylines),
            "homology_class": [c.tolist() for c in self.homology_class],
            "total_class": self.total_class.tolist(),
        }


def _frame(p):
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    h = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = h - np.dot(h, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return p, e1, e2


def fallback_values(k=12, tilt=0.15):
    """Deterministic perturbed regular-value candidates around the default."""
    out = []
    for j in range(k):
        ang = TWO_PI * j / k + 0.5
        v = np.array([tilt * np.cos(ang), tilt * np.sin(ang), 1.0])
        out.append(v / np.linalg.norm(v))
    return out


_TETS = []
for perm in sorted(permutations(range(3))):
    v = [np.zeros(3, dtype=int)]
    for ax in perm:
        nxt = v[-1].copy()
        nxt[ax] += 1
        v.append(nxt)
    _TETS.append((np.stack(v), perm))


def _candidate_cubes(g1, g2, hs):
    corners = [(di, dj, dk) for di in (0, 1) for dj in (0, 1) for dk in (0, 1)]

    def stack(a):
        return np.stack(
            [np.roll(a, (-di, -dj, -dk), axis=(0, 1, 2)) for di, dj, dk in corners]
        )

    s1 = stack(g1)
    s2 = stack(g2)
    sh = stack(hs)
    mask = (
        (s1.min(axis=0) < 0.0)
        & (s1.max(axis=0) > 0.0)
        & (s2.min(axis=0) < 0.0)
        & (s2.max(axis=0) > 0.0)
        & (sh.max(axis=0) > 0.0)
    )
    return np.argwhere(mask)


def _attempt(field3, p):
    F = field3.values
    shape = np.array(F.shape[:3])
    p, e1, e2 = _frame(p)
    g1 = F @ e1
    g2 = F @ e2
    hs = F @ p
    if np.any((np.abs(g1) < 1e-12) & (np.abs(g2) < 1e-12)):
        raise NotRegularValue("value attained exactly at a grid sample")

    cubes = _candidate_cubes(g1, g2, hs)
    face_cache = {}

    def face_zero(vglobal):
        """Zero of the interpolated constraints on a triangle, if interior."""
        key = frozenset(map(tuple, (vglobal % shape)))
        if key in face_cache:
            return face_cache[key]
        idx = tuple((vglobal % shape).T)
        a1 = g1[idx]
        a2 = g2[idx]
        ah = hs[idx]
        m00 = a1[1] - a1[0]
        m01 = a1[2] - a1[0]
        m10 = a2[1] - a2[0]
        m11 = a2[2] - a2[0]
        det = m00 * m11 - m01 * m10
        scale = max(abs(a1).max(), abs(a2).max(), 1e-300)
        result = None
        if abs(det) < _DET_EPS * scale * scale:
            if (abs(a1) + abs(a2)).min() < 1e-9 * scale:
                raise NotRegularValue("degenerate face at %s" % (sorted(key),))
        else:
            l1 = (-a1[0] * m11 + a2[0] * m01) / det
            l2 = (-a2[0] * m00 + a1[0] * m10) / det
            inside = (
                l1 > _BARY_EPS
                and l2 > _BARY_EPS
                and (1.0 - l1 - l2) > _BARY_EPS
            )
            near = (
                abs(l1) <= _BARY_EPS
                or abs(l2) <= _BARY_EPS
                or abs(1.0 - l1 - l2) <= _BARY_EPS
            )
            if near:
                raise NotRegularValue("preimage touches a face boundary")
            if inside:
                hval = ah[0] + l1 * (ah[1] - ah[0]) + l2 * (ah[2] - ah[0])
                if hval > 0.0:
                    pos = (
                        vglobal[0]
                        + l1 * (vglobal[1] - vglobal[0])
                        + l2 * (vglobal[2] - vglobal[0])
                    )
                    result = (key, pos.astype(float))
        face_cache[key] = result
        return result

    segments = []  # (key_in, key_out, pos_in, pos_out)
    for base in cubes:
        for offsets, perm in _TETS:
            vglob = base[None, :] + offsets
            idx = tuple((vglob % shape).T)
            v1 = g1[idx]
            v2 = g2[idx]
            if v1.min() > 0.0 or v1.max() < 0.0 or v2.min() > 0.0 or v2.max() < 0.0:
                continue
            hits = []
            for drop in range(4):
                tri = np.delete(vglob, drop, axis=0)
                z = face_zero(tri)
                if z is not None:
                    hits.append(z)
            if not hits:
                continue
            if len(hits) != 2:
                raise NotRegularValue(
                    "tetrahedron with %d boundary crossings" % len(hits)
                )
            grad1 = np.empty(3)
            grad2 = np.empty(3)
            for j, ax in enumerate(perm):
                grad1[ax] = v1[j + 1] - v1[j]
                grad2[ax] = v2[j + 1] - v2[j]
            tau = np.cross(grad1, grad2)
            (ka, pa), (kb, pb) = hits
            disp = (pb - pa + shape / 2.0) % shape - shape / 2.0
            if np.dot(disp, tau) >= 0.0:
                segments.append((ka, kb, pa, pb))
            else:
                segments.append((kb, ka, pb, pa))

    incid = {}
    for i, (ka, kb, _, _) in enumerate(segments):
        incid.setdefault(ka, []).append(i)
        incid.setdefault(kb, []).append(i)
    for key, ids in incid.items():
        if len(ids) != 2:
            raise BrokenChain("face with %d incident segments" % len(ids))

    used = np.zeros(len(segments), dtype=bool)
    polylines = []
    classes = []
    for start in range(len(segments)):
        if used[start]:
            continue
        pts = []
        cur = start
        ka, kb, pa, pb = segments[cur]
        pos = pa.copy()
        pts.append(pos.copy())
        while True:
            used[cur] = True
            ka, kb, pa, pb = segments[cur]
            step = (pb - pa + shape / 2.0) % shape - shape / 2.0
            pos = pos + step
            pts.append(pos.copy())
            nxt = [i for i in incid[kb] if i != cur]
            cur = nxt[0]
            if used[cur]:
                if cur != start:
                    raise BrokenChain("walk reentered a used segment")
                break
            # align: the next segment must start on face kb
            if segments[cur][0] != kb:
                raise BrokenChain("inconsistent segment orientation at a face")
        total = pts[-1] - pts[0]
        wraps = np.rint(total / shape).astype(int)
        if np.max(np.abs(total - wraps * shape)) > 1.0:
            raise BrokenChain("polyline fails to close within one grid cell")
        line = np.stack(pts[:-1]) * (TWO_PI / shape)
        polylines.append(np.mod(line, TWO_PI))
        classes.append(wraps)

    return PreimageLink(polylines, classes, p, tuple(int(s) for s in shape))


def extract_preimage(field3, p=None):
    """Extract the closed preimage polylines of a regular value.

    With p=None the default value (0, 0, 1) is tried first, then twelve
    deterministic perturbed candidates; an explicit p is attempted once.
    """
    if p is not None:
        return _attempt(field3, p)
    errors = []
    for cand in [NORTH] + fallback_values():
        try:
            return _attempt(field3, cand)
        except (NotRegularValue, BrokenChain) as exc:
            errors.append(str(exc))
    raise NotRegularValue(
        "no regular value among default and 12 fallbacks: " + "; ".join(errors[-3:])
    )
