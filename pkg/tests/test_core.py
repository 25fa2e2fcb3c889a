import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coneradon.core import (
    ConeSinogram,
    ConeSinogramGrid,
    SphereQuadrature,
    VolumeField,
    VolumeGrid,
    field_l2_error,
    grid_coordinates,
    make_sphere_quadrature,
    nearest_index,
)
from coneradon.errors import DomainError, ShapeError, UnsupportedDimensionError, WeightError


def test_grid_coordinates_endpoints():
    g = VolumeGrid(2, [(0.0, 1.0)], (1.0, 2.0), 2, 2)
    assert grid_coordinates(g, (0, 0)) == (0.0, 1.0)
    assert grid_coordinates(g, (1, 1)) == (1.0, 2.0)


def test_grid_coordinates_midpoint():
    g = VolumeGrid(2, [(-1.0, 1.0)], (1.0, 2.0), 3, 2)
    assert grid_coordinates(g, (1, 0))[0] == 0.0


def test_grid_coordinates_out_of_range():
    g = VolumeGrid(2, [(-1.0, 1.0)], (1.0, 2.0), 3, 2)
    with pytest.raises(IndexError):
        grid_coordinates(g, (3, 0))
    with pytest.raises(IndexError):
        grid_coordinates(g, (-1, 0))


@settings(max_examples=25, deadline=None)
@given(
    st.integers(2, 7), st.integers(2, 7), st.integers(2, 7),
    st.floats(-5, 5), st.floats(0.1, 4), st.floats(0.01, 2),
)
def test_coordinate_index_round_trip(n1, n2, ny, lo, length, ymin):
    g = VolumeGrid(3, [(lo, lo + length), (lo, lo + 2 * length)], (ymin, ymin + length), (n1, n2), ny)
    for idx in np.ndindex(*g.shape):
        assert nearest_index(g, grid_coordinates(g, idx)) == tuple(idx)


@pytest.mark.parametrize("kw", [
    dict(y_extent=(0.0, 1.0)),
    dict(y_extent=(-1.0, 1.0)),
    dict(n_y=1),
    dict(x_extent=[(1.0, 1.0)]),
])
def test_volume_grid_invariants(kw):
    args = dict(d=2, x_extent=[(-1.0, 1.0)], y_extent=(1.0, 2.0), n_x=4, n_y=4)
    args.update(kw)
    with pytest.raises(DomainError):
        VolumeGrid(**args)


def test_unsupported_dimension():
    with pytest.raises(UnsupportedDimensionError):
        VolumeGrid(4, [(-1, 1)] * 3, (1, 2), 4, 4)
    with pytest.raises(UnsupportedDimensionError):
        make_sphere_quadrature(4)


@pytest.mark.parametrize("th", [(0.0, 1.0), (0.5, math.pi / 2), (1.0, 0.5), (-0.1, 1.0)])
def test_sinogram_theta_range_strict(th):
    with pytest.raises(DomainError):
        ConeSinogramGrid(2, [(-1, 1)], 8, th, 8)


def test_sinogram_grid_refined_u():
    g = ConeSinogramGrid(3, [(-1, 1), (-2, 2)], (5, 9), (0.1, 1.0), 4)
    r = g.refined_u(4)
    assert r.n_u == (17, 33)
    assert np.allclose(r.u_axes()[0][::4], g.u_axes()[0])


def test_sphere_quadrature_d2():
    for n in (1, 7, 64):
        q = make_sphere_quadrature(2, n)
        assert q.nodes.ravel().tolist() == [1.0, -1.0]
        assert q.weights.tolist() == [1.0, 1.0]


def test_sphere_quadrature_d3_n4():
    q = make_sphere_quadrature(3, 4)
    assert np.allclose(q.nodes, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    assert np.allclose(q.weights, math.pi / 2, rtol=0, atol=1e-15)


def test_sphere_quadrature_weights_sum():
    assert abs(make_sphere_quadrature(3, 100).weights.sum() - 2 * math.pi) < 1e-12
    assert abs(make_sphere_quadrature(2).integrate(np.ones(2)) - 2.0) < 1e-12


@pytest.mark.parametrize("n", [3, 16, 17, 64, 257])
def test_sphere_quadrature_second_moment(n):
    q = make_sphere_quadrature(3, n)
    assert abs(q.integrate(q.nodes[:, 0] ** 2) - math.pi) < 1e-10
    assert np.allclose(np.linalg.norm(q.nodes, axis=1), 1.0, atol=1e-12)


def test_sphere_quadrature_validation():
    with pytest.raises(DomainError):
        SphereQuadrature(3, np.array([[1.0, 0.1]]), np.array([1.0]))
    with pytest.raises(DomainError):
        SphereQuadrature(3, np.array([[1.0, 0.0]]), np.array([-1.0]))


def _field(values=None, grid=None):
    grid = grid or VolumeGrid(2, [(-1, 1)], (1, 2), 5, 4)
    if values is None:
        values = np.random.default_rng(1).normal(size=grid.shape)
    return VolumeField(grid, values)


def test_l2_error_examples():
    b = _field()
    assert field_l2_error(b, b) == (0.0, 0.0)
    zero = VolumeField(b.grid, np.zeros(b.grid.shape))
    assert field_l2_error(zero, b)[1] == pytest.approx(1.0, abs=1e-15)
    assert field_l2_error(b * 2.0, b)[1] == pytest.approx(1.0, abs=1e-15)
    assert field_l2_error(zero, zero) == (0.0, 0.0)
    assert field_l2_error(b, zero)[1] == math.inf


def test_l2_error_cell_weighting():
    g = VolumeGrid(2, [(0, 2)], (1, 3), 3, 3)
    a = VolumeField(g, np.ones(g.shape))
    z = VolumeField(g, np.zeros(g.shape))
    # 9 nodes, cell volume 1
    assert field_l2_error(a, z)[0] == pytest.approx(3.0)


def test_l2_error_grid_mismatch():
    a = _field()
    other = _field(grid=VolumeGrid(2, [(-1, 1)], (1, 2), 5, 5))
    with pytest.raises(ShapeError):
        field_l2_error(a, other)


def test_field_shape_and_immutability():
    g = VolumeGrid(2, [(-1, 1)], (1, 2), 5, 4)
    with pytest.raises(ShapeError):
        VolumeField(g, np.zeros(7))
    f = VolumeField(g, np.zeros(20))
    assert f.values.shape == (5, 4)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_sinogram_p_mixing_rejected():
    g = ConeSinogramGrid(2, [(-1, 1)], 4, (0.1, 1.0), 3)
    a = ConeSinogram(g, 0.0, np.ones(g.shape))
    b = ConeSinogram(g, 1.0, np.ones(g.shape))
    with pytest.raises(WeightError):
        a + b
    with pytest.raises(WeightError):
        a - b
    assert np.all((a + a).values == 2.0)
