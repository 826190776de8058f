"""Sphere-valued map sampling: charts, grids, and failure gates."""

import numpy as np
import pytest

from mu3.catalog import catalog
from mu3.curves import lift_chart
from mu3.errors import (
    ComponentsIntersect,
    GridMismatch,
    InputOutputError,
    UnresolvablePole,
)
from mu3.maps import (
    CELL_FLAG_ANGLE,
    MIN_DISTANCE,
    ConfMap3,
    GaussMap,
    conf_map3,
    gauss_map,
    min_chord_distance,
    read_field3,
    sample_on_grid,
    write_field3,
)

TWO_PI = 2.0 * np.pi


def _offset_circle(delta, radius=1.0):
    def fn(th):
        th = np.asarray(th, dtype=float)
        out = np.stack(
            [radius * np.cos(th), radius * np.sin(th), np.zeros_like(th)],
            axis=-1,
        )
        return out + np.asarray(delta, dtype=float)

    return lift_chart(fn)


def test_gauss_map_values_are_unit():
    e = catalog("hopf_plus_unknot")
    g = gauss_map(e.components[1], e.components[2])
    th = np.linspace(0.0, TWO_PI, 7)
    v = g.eval(th, th + 0.3)
    assert np.allclose(np.linalg.norm(v, axis=-1), 1.0, atol=1e-12)


def test_intersecting_components_rejected():
    c1 = _offset_circle((0.0, 0.0, 0.0))
    c2 = _offset_circle((0.0, 0.0, 1e-9))
    with pytest.raises(ComponentsIntersect):
        gauss_map(c1, c2)
    with pytest.raises(ComponentsIntersect):
        conf_map3(c1, c2, _offset_circle((3.0, 0.0, 0.0)))


def test_near_touch_passes_gate_but_pole_is_unresolvable():
    # a chart offset of 2e-5 keeps the chord distance above the
    # intersection gate, yet the translated product sits within the pole
    # margin; rotations conjugate the product and preserve its scalar
    # part, so every candidate fails the same way
    c1 = _offset_circle((0.0, 0.0, 0.0))
    c2 = _offset_circle((0.0, 0.0, 2e-5))
    c3 = _offset_circle((4.0, 0.0, 0.0), radius=0.5)
    assert min_chord_distance(c1, c2) > MIN_DISTANCE
    m = conf_map3(c1, c2, c3)
    with pytest.raises(UnresolvablePole):
        m.sample_values(16)
    with pytest.raises(UnresolvablePole):
        m.eval(np.zeros(1), np.zeros(1), np.zeros(1))


def test_sample_grid_size_validation():
    e = catalog("borromean")
    m = conf_map3(*e.components)
    with pytest.raises(ValueError):
        sample_on_grid(m, 7)
    with pytest.raises(ValueError):
        sample_on_grid(m, 6)


def test_undersampling_flag_depends_on_resolution():
    e = catalog("borromean")
    m = conf_map3(*e.components)
    coarse = sample_on_grid(m, 8)
    fine = sample_on_grid(m, 48)
    assert coarse.undersampled
    assert not fine.undersampled
    assert fine.max_cell_angle < CELL_FLAG_ANGLE < coarse.max_cell_angle


def test_restriction_matches_full_grid():
    e = catalog("borromean")
    m = conf_map3(*e.components)
    n = 16
    full = sample_on_grid(m, n).values
    fix_u = m.sample_restricted(2, n, fixed=0.0)
    assert np.allclose(fix_u, full[:, :, 0, :], atol=1e-12)
    fix_s = m.sample_restricted(0, n, fixed=0.0)
    assert np.allclose(fix_s, full[0, :, :, :], atol=1e-12)


def test_triple_map_values_are_unit():
    e = catalog("borromean")
    m = conf_map3(*e.components)
    v = sample_on_grid(m, 12).values
    assert np.allclose(np.linalg.norm(v, axis=-1), 1.0, atol=1e-12)


def test_field_file_roundtrip(tmp_path):
    e = catalog("borromean")
    m = conf_map3(*e.components)
    g = sample_on_grid(m, 12)
    path = tmp_path / "field.mu3g"
    write_field3(path, g.values)
    back = read_field3(path)
    assert back.shape == (12, 12, 12)
    assert np.allclose(back.values, g.values, atol=1e-7)


def test_field_file_bad_magic(tmp_path):
    path = tmp_path / "junk.mu3g"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(InputOutputError):
        read_field3(path)
