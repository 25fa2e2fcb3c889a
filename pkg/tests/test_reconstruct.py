import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coneradon.core import ConeSinogram, ConeSinogramGrid, VolumeField, VolumeGrid, field_l2_error
from coneradon.errors import DomainError, ShapeError, WeightError
from coneradon.forward import auto_ray_config, forward_project
from coneradon.phantom import Bump, PhantomSpec, rasterize
from coneradon.reconstruct import (
    ReconstructionConfig,
    backproject_angular,
    backproject_spatial,
    filter_sinogram,
    reconstruct,
    reconstruct_fbp,
)
from coneradon.transforms import FilterConfig, hilbert_1d, spectral_derivative_1d

REF2 = PhantomSpec(2, (Bump("mollifier", (0.0, 2.0), 1.0),))
PLAIN = FilterConfig(1.0, "none", 2)


def random_sino(d=2, p=0.0, seed=0, n_u=24, n_t=10, u_ext=(-3.0, 3.0), theta=(0.1, 1.2)):
    grid = ConeSinogramGrid(d, [u_ext] * (d - 1), n_u, theta, n_t)
    vals = np.random.default_rng(seed).normal(size=grid.shape)
    return ConeSinogram(grid, p, vals)


def small_grid(d=2, n=7):
    return VolumeGrid(d, [(-1.0, 1.0)] * (d - 1), (0.8, 2.5), n, n + 1)


def brute_angular_2d(q, grid, p):
    us = q.grid.u_axes()[0]
    th = q.grid.thetas()
    w = np.full(th.size, th[1] - th[0])
    w[[0, -1]] *= 0.5
    w *= np.cos(th) ** (-(1 + p))
    out = np.zeros(grid.shape)
    for a, x in enumerate(grid.x_axes()[0]):
        for c, y in enumerate(grid.y_axis()):
            acc = 0.0
            for j, t in enumerate(th):
                for n in (1.0, -1.0):
                    acc += w[j] * np.interp(x + y * math.tan(t) * n, us, q.values[:, j], left=0.0, right=0.0)
            out[a, c] = y**p * acc / (2 * math.pi)
    return out


def brute_spatial_2d(q, grid, p):
    us = q.grid.u_axes()[0]
    th = q.grid.thetas()
    wu = np.full(us.size, us[1] - us[0])
    wu[[0, -1]] *= 0.5
    out = np.zeros(grid.shape)
    for a, x in enumerate(grid.x_axes()[0]):
        for c, y in enumerate(grid.y_axis()):
            acc = 0.0
            for k, u in enumerate(us):
                r = abs(u - x)
                t = math.atan2(r, y)
                if t < th[0] or t > th[-1]:
                    continue
                acc += wu[k] * (r * r + y * y) ** ((p - 1) / 2) * np.interp(t, th, q.values[k])
            out[a, c] = acc / (2 * math.pi)
    return out


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5])
def test_angular_matches_brute_force(p):
    q = random_sino(p=p, seed=1)
    grid = small_grid()
    got = backproject_angular(q, grid, p).values
    ref = brute_angular_2d(q, grid, p)
    assert np.max(np.abs(got - ref)) < 1e-12 * np.max(np.abs(ref))


@pytest.mark.parametrize("p", [0.0, 1.0, 2.0])
def test_spatial_matches_brute_force(p):
    q = random_sino(p=p, seed=2, n_u=41, u_ext=(-5.0, 5.0))
    grid = small_grid()
    got = backproject_spatial(q, grid, p).values
    ref = brute_spatial_2d(q, grid, p)
    assert np.max(np.abs(got - ref)) < 1e-12 * np.max(np.abs(ref))


def test_single_bin_support():
    grid0 = ConeSinogramGrid(2, [(-3.0, 3.0)], 31, (0.2, 1.0), 9)
    vals = np.zeros(grid0.shape)
    i0, j0 = 17, 4
    vals[i0, j0] = 1.0
    q = ConeSinogram(grid0, 0.0, vals)
    grid = VolumeGrid(2, [(-2.0, 2.0)], (0.5, 2.5), 81, 61)
    out = backproject_angular(q, grid, 0.0).values
    u0 = grid0.u_axes()[0][i0]
    du = grid0.u_spacing[0]
    t0 = math.tan(grid0.thetas()[j0])
    X, Y = grid.mesh()
    reach = np.minimum(np.abs(X + Y * t0 - u0), np.abs(X - Y * t0 - u0))
    assert np.any(out != 0)
    assert not np.any(out[reach >= du])
    # nonzero inside the stencil away from the interpolation zeros
    assert np.all(out[reach < 0.5 * du] > 0)


@pytest.mark.parametrize("bp", [backproject_angular, backproject_spatial])
@pytest.mark.parametrize("d", [2, 3])
def test_zero_in_zero_out(bp, d):
    g = ConeSinogram(ConeSinogramGrid(d, [(-2, 2)] * (d - 1), 8, (0.1, 1.0), 5), 1.0, np.zeros((8,) * (d - 1) + (5,)))
    assert not np.any(bp(g, small_grid(d, 4), 1.0).values)
    cfg = ReconstructionConfig("fbp-spatial" if bp is backproject_spatial else "fbp-angular", sphere_nodes=8)
    assert not np.any(reconstruct_fbp(g, small_grid(d, 4), cfg).values)


@pytest.mark.parametrize("method", ["fbp-angular", "fbp-spatial"])
def test_reconstruct_linear(method):
    a = random_sino(seed=3)
    b = random_sino(seed=4)
    grid = small_grid()
    cfg = ReconstructionConfig(method, FilterConfig(0.9, "cosine", 2))
    ra = reconstruct_fbp(a, grid, cfg).values
    rb = reconstruct_fbp(b, grid, cfg).values
    scaled = reconstruct_fbp(ConeSinogram(a.grid, 0.0, 4.0 * a.values), grid, cfg).values
    assert np.array_equal(scaled, 4.0 * ra)
    mix = reconstruct_fbp(ConeSinogram(a.grid, 0.0, 1.5 * a.values - 0.3 * b.values), grid, cfg).values
    assert np.allclose(mix, 1.5 * ra - 0.3 * rb, rtol=0, atol=1e-12 * np.abs(mix).max())


@settings(max_examples=10, deadline=None)
@given(st.floats(-50, 50).filter(lambda v: abs(v) > 1e-3))
def test_reconstruct_homogeneous(alpha):
    g = random_sino(seed=5)
    grid = small_grid(n=5)
    base = reconstruct_fbp(g, grid).values
    scaled = reconstruct_fbp(ConeSinogram(g.grid, 0.0, alpha * g.values), grid).values
    assert np.allclose(scaled, alpha * base, rtol=1e-12, atol=1e-12 * abs(alpha) * np.abs(base).max())


@pytest.mark.parametrize("bp", [backproject_angular, backproject_spatial])
def test_translation_equivariance(bp):
    g = random_sino(seed=6, n_u=33, u_ext=(-4.0, 4.0))
    shift = 5 * g.grid.u_spacing[0]
    moved = ConeSinogram(ConeSinogramGrid(2, [(-4.0 + shift, 4.0 + shift)], 33, (0.1, 1.2), 10), 0.0, g.values)
    grid = small_grid()
    grid_moved = VolumeGrid(2, [(-1.0 + shift, 1.0 + shift)], (0.8, 2.5), 7, 8)
    a = bp(g, grid, 0.0).values
    b = bp(moved, grid_moved, 0.0).values
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))


def test_filter_sinogram_matches_derivative_of_hilbert():
    g = random_sino(seed=7, n_u=40)
    q = filter_sinogram(g, FilterConfig(1.0, "none", 1))
    ref = spectral_derivative_1d(hilbert_1d(g.values, axis=0), g.grid.u_spacing[0], axis=0)
    assert np.max(np.abs(q.values - ref)) < 1e-12 * np.abs(ref).max()
    assert q.p == g.p


def test_filtered_projection_boundary_decay():
    sg = ConeSinogramGrid(2, [(-16.0, 16.0)], 256, (0.05, 1.2), 40)
    q = filter_sinogram(forward_project(REF2, sg, 0.0), FilterConfig()).values
    shell = np.abs(q[[0, 1, -2, -1], :]).max()
    assert np.all(np.isfinite(q))
    assert shell < 0.01 * np.abs(q).max()


def _pipeline_pair(p, method):
    sg = ConeSinogramGrid(2, [(-40.0, 40.0)], 256, (0.001, 1.52), 120)
    vg = VolumeGrid(2, [(-1.0, 1.0)], (1.0, 3.0), 64, 64)
    cfg = ReconstructionConfig(method, FilterConfig(1.0, "none", 2, 4))
    ray = auto_ray_config(REF2, 1.52)
    direct = reconstruct_fbp(forward_project(REF2, sg, p, ray_cfg=ray), vg, cfg)
    via0 = reconstruct_fbp(forward_project(REF2.weighted(-p), sg, 0.0, ray_cfg=ray), vg, cfg)
    via0 = VolumeField(vg, via0.values * vg.mesh()[-1] ** p)
    return direct, via0, rasterize(REF2, vg)


@pytest.mark.parametrize("method", ["fbp-angular", "fbp-spatial"])
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_p_consistency(p, method):
    direct, via0, truth = _pipeline_pair(p, method)
    assert field_l2_error(direct, via0)[1] < 0.02
    assert field_l2_error(direct, truth)[1] < 0.2


def test_wrong_p_fails_budget():
    sg = ConeSinogramGrid(2, [(-40.0, 40.0)], 256, (0.001, 1.52), 120)
    vg = VolumeGrid(2, [(-1.0, 1.0)], (1.0, 3.0), 64, 64)
    cfg = ReconstructionConfig("fbp-angular", FilterConfig(1.0, "none", 2, 4))
    truth = rasterize(REF2, vg)
    g = forward_project(REF2, sg, 1.0)
    matched = field_l2_error(reconstruct_fbp(g, vg, cfg), truth)[1]
    for wrong in (0.0, 2.0):
        bad = reconstruct_fbp(ConeSinogram(g.grid, wrong, g.values), vg, cfg)
        assert field_l2_error(bad, truth)[1] >= 3 * matched


@pytest.mark.parametrize("bp", [backproject_angular, backproject_spatial])
def test_weight_error(bp):
    q = random_sino(p=1.0)
    with pytest.raises(WeightError):
        bp(q, small_grid(), 0.0)


def test_dimension_error():
    with pytest.raises(ShapeError):
        backproject_angular(random_sino(), small_grid(3, 4), 0.0)


def test_config_validation():
    with pytest.raises(DomainError):
        ReconstructionConfig("art")
    with pytest.raises(DomainError):
        ReconstructionConfig(sphere_nodes=4)
    with pytest.raises(DomainError):
        ReconstructionConfig(interpolation="cubic")
    with pytest.raises(DomainError):
        reconstruct_fbp(random_sino(), small_grid(), ReconstructionConfig("fourier-hankel"))


def test_reconstruct_dispatch():
    g = random_sino(seed=8)
    grid = small_grid()
    for method in ("fbp-angular", "fbp-spatial"):
        cfg = ReconstructionConfig(method)
        assert np.array_equal(reconstruct(g, grid, cfg).values, reconstruct_fbp(g, grid, cfg).values)


def test_angular_3d_sphere_nodes_converge():
    # the direction rule on a smooth filtered projection settles as nodes are added
    sg = ConeSinogramGrid(3, [(-6.0, 6.0)] * 2, 48, (0.05, 1.1), 24)
    ph = PhantomSpec(3, (Bump("mollifier", (0.0, 0.0, 2.0), 1.0),))
    q = filter_sinogram(forward_project(ph, sg, 0.0), FilterConfig(0.9, "cosine", 2))
    vg = VolumeGrid(3, [(-1.0, 1.0)] * 2, (1.0, 3.0), 9, 9)
    a = backproject_angular(q, vg, 0.0, 32)
    b = backproject_angular(q, vg, 0.0, 64)
    c = backproject_angular(q, vg, 0.0, 128)
    assert field_l2_error(c, b)[1] < field_l2_error(b, a)[1] or field_l2_error(c, b)[1] < 1e-10
