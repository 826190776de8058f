"""Alternating-form algebra on the triple product.

The block identity at the end is the algebraic heart of the orbit
averaging argument: contracting a 3-form with one factor-wise field per
block equals wedging against the contracted block volumes.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mu3.exterior import AltForm, basis_form, random_form, volume_block

coeff = st.floats(-3.0, 3.0, allow_nan=False)


def _rand_form(seed, d, degree):
    return random_form(np.random.default_rng(seed), d, degree)


@given(st.integers(0, 10_000), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_wedge_anticommutes_on_one_forms(sa, sb):
    a = _rand_form(sa, 6, 1)
    b = _rand_form(sb, 6, 1)
    assert a.wedge(b).allclose(b.wedge(a).scale(-1.0))


@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_wedge_associative(sa, sb, sc):
    a = _rand_form(sa, 7, 1)
    b = _rand_form(sb, 7, 2)
    c = _rand_form(sc, 7, 1)
    assert a.wedge(b.wedge(c)).allclose(a.wedge(b).wedge(c))


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_interior_squares_to_zero(seed):
    rng = np.random.default_rng(seed)
    beta = random_form(rng, 8, 3)
    v = rng.normal(size=8)
    assert beta.interior(v).interior(v).allclose(AltForm(8, 1))


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_interior_antiderivation(seed):
    rng = np.random.default_rng(seed)
    a = random_form(rng, 6, 2)
    b = random_form(rng, 6, 2)
    v = rng.normal(size=6)
    lhs = a.wedge(b).interior(v)
    rhs = a.interior(v).wedge(b) + a.wedge(b.interior(v))
    assert lhs.allclose(rhs, tol=1e-10)


def _block_field(rng, block):
    v = np.zeros(9)
    v[3 * block:3 * block + 3] = rng.normal(size=3)
    return v


@pytest.mark.parametrize("seed", range(20))
def test_triple_contraction_matches_block_volumes(seed):
    # (i_B3 i_B2 i_B1 beta) mu1^mu2^mu3 == beta ^ i_B1 mu1 ^ i_B2 mu2 ^ i_B3 mu3
    # for any 3-form beta when each field lives on its own block
    rng = np.random.default_rng(1000 + seed)
    beta = random_form(rng, 9, 3)
    fields = [_block_field(rng, blk) for blk in range(3)]
    vols = [volume_block(9, blk) for blk in range(3)]

    scalar = beta.interior(fields[0]).interior(fields[1]).interior(fields[2])
    lhs = vols[0].wedge(vols[1]).wedge(vols[2]).scale(
        scalar.coefficient(())
    )
    rhs = beta
    for f, m in zip(fields, vols):
        rhs = rhs.wedge(m.interior(f))
    assert lhs.allclose(rhs, tol=1e-12)
    # the contracted block volumes kill mismatched fields
    for i in range(3):
        for j in range(3):
            if i != j:
                assert vols[j].interior(fields[i]).allclose(AltForm(9, 2))
