"""Dense exterior algebra over R^d for pointwise identity checks.

Alternating forms are dictionaries from strictly increasing index tuples to
float coefficients.  Only small d (<= 9) and pointwise evaluations are
needed, so no attempt is made at vectorized performance.
"""

from itertools import combinations

import numpy as np


class AltForm:
    def __init__(self, d, degree, coeffs=None):
        self.d = d
        self.degree = degree
        self.coeffs = dict(coeffs or {})

    def copy(self):
        return AltForm(self.d, self.degree, self.coeffs)

    def __add__(self, other):
        assert self.d == other.d and self.degree == other.degree
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0.0) + c
        return AltForm(self.d, self.degree, out)

    def scale(self, a):
        return AltForm(self.d, self.degree, {i: a * c for i, c in self.coeffs.items()})

    def wedge(self, other):
        assert self.d == other.d
        out = {}
        for ia, ca in self.coeffs.items():
            for ib, cb in other.coeffs.items():
                if set(ia) & set(ib):
                    continue
                merged = ia + ib
                sign, key = _sort_sign(merged)
                out[key] = out.get(key, 0.0) + sign * ca * cb
        return AltForm(self.d, self.degree + other.degree, out)

    def interior(self, v):
        """Contraction with the vector v in the first slot."""
        v = np.asarray(v, dtype=float)
        out = {}
        for idx, c in self.coeffs.items():
            for pos, i in enumerate(idx):
                if v[i] == 0.0:
                    continue
                rest = idx[:pos] + idx[pos + 1:]
                out[rest] = out.get(rest, 0.0) + ((-1.0) ** pos) * v[i] * c
        return AltForm(self.d, self.degree - 1, out)

    def coefficient(self, idx):
        return self.coeffs.get(tuple(idx), 0.0)

    def allclose(self, other, tol=1e-12):
        keys = set(self.coeffs) | set(other.coeffs)
        return all(
            abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0)) <= tol
            for k in keys
        )


def _sort_sign(idx):
    """Sign of the permutation sorting idx, and the sorted tuple."""
    idx = list(idx)
    sign = 1.0
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def basis_form(d, idx):
    sign, key = _sort_sign(tuple(idx))
    return AltForm(d, len(key), {key: sign})


def random_form(rng, d, degree):
    coeffs = {idx: rng.standard_normal() for idx in combinations(range(d), degree)}
    return AltForm(d, degree, coeffs)


def volume_block(d, block):
    """dx_{3b} ^ dx_{3b+1} ^ dx_{3b+2} on R^d."""
    return basis_form(d, (3 * block, 3 * block + 1, 3 * block + 2))
