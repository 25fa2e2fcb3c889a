import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coneradon.core import VolumeGrid
from coneradon.errors import DomainError, ShapeError, SupportError
from coneradon.phantom import Bump, PhantomSpec, eval_phantom, rasterize


def moll(center, radius=1.0, amp=1.0):
    return Bump("mollifier", center, radius, amp)


def test_value_at_center_is_amplitude():
    ph = PhantomSpec(2, (moll((0.0, 2.0), amp=3.5),))
    assert eval_phantom(ph, [0.0, 2.0]) == 3.5
    g = PhantomSpec(2, (Bump("truncated-gaussian", (0.0, 2.0), 1.0, 1.0, 0.25),))
    assert eval_phantom(g, [0.0, 2.0]) == 1.0


def test_default_cutoff_is_four_sigma():
    assert Bump("truncated-gaussian", (0.0, 2.0), sigma=0.3).radius == pytest.approx(1.2)


def test_outside_support_exact_zero():
    ph = PhantomSpec(3, (moll((0.0, 0.0, 2.0)),))
    pts = np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 3.0], [0.8, 0.8, 2.0], [5.0, 5.0, 5.0]])
    assert np.all(eval_phantom(ph, pts) == 0.0)


def test_two_identical_bumps_double():
    one = PhantomSpec(2, (moll((0.3, 2.0), 0.7),))
    two = PhantomSpec(2, (moll((0.3, 2.0), 0.7),) * 2)
    pts = np.random.default_rng(0).uniform([-1, 1], [1, 3], size=(200, 2))
    assert np.array_equal(eval_phantom(two, pts), 2.0 * eval_phantom(one, pts))


def test_matches_independent_evaluation():
    b = Bump("truncated-gaussian", (0.2, -0.1, 2.0), 1.1, 0.8, 0.4)
    ph = PhantomSpec(3, (b,))
    pts = np.random.default_rng(1).uniform([-1, -1, 0.5], [1, 1, 3.5], size=(500, 3))
    ref = oracles.bump_value(("truncated-gaussian", b.center, 1.1, 0.4, 0.8), pts)
    assert np.allclose(eval_phantom(ph, pts), ref, rtol=1e-14, atol=0)


def test_rasterize_empty_is_zero():
    g = VolumeGrid(2, [(-1, 1)], (1, 3), 9, 9)
    assert not np.any(rasterize(PhantomSpec(2), g).values)


def test_rasterize_boundary_shell_zero():
    g = VolumeGrid(2, [(-1, 1)], (1, 3), 33, 33)
    v = rasterize(PhantomSpec(2, (moll((0.0, 2.0)),)), g).values
    assert not np.any(v[0, :]) and not np.any(v[-1, :])
    assert not np.any(v[:, 0]) and not np.any(v[:, -1])
    assert v[16, 16] == 1.0


def test_rasterize_gaussian_center_node():
    g = VolumeGrid(2, [(-1, 1)], (1, 3), 5, 5)
    ph = PhantomSpec(2, (Bump("truncated-gaussian", (0.0, 2.0), 1.0, 1.0, 0.25),))
    assert rasterize(ph, g).values[2, 2] == 1.0


def test_rasterize_support_error():
    g = VolumeGrid(2, [(-1, 1)], (1, 3), 9, 9)
    with pytest.raises(SupportError):
        rasterize(PhantomSpec(2, (moll((0.5, 2.0)),)), g)


def test_rasterize_linearity_exact():
    g = VolumeGrid(2, [(-2, 2)], (0.5, 3.5), 41, 31)
    a = PhantomSpec(2, (moll((0.0, 2.0)),))
    b = PhantomSpec(2, (Bump("truncated-gaussian", (0.5, 1.8), 1.0, -0.5, 0.3),))
    assert np.array_equal(rasterize(a + b, g).values, rasterize(a, g).values + rasterize(b, g).values)


@pytest.mark.parametrize("bad", [
    dict(kind="box", center=(0, 2), radius=1.0),
    dict(kind="mollifier", center=(0, 2), radius=-1.0),
    dict(kind="mollifier", center=(0, 2), radius=1.0, amplitude=math.inf),
    dict(kind="mollifier", center=(0, 2), radius=1.0, sigma=0.3),
    dict(kind="truncated-gaussian", center=(0, 2), radius=1.0),
])
def test_bump_validation(bad):
    with pytest.raises(DomainError):
        Bump(**bad)


def test_bump_touching_vertex_plane():
    with pytest.raises(SupportError):
        moll((0.0, 1.0), 1.0)
    with pytest.raises(SupportError):
        Bump("truncated-gaussian", (0.0, 2.0), 2.0, 1.0, 0.5)


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        PhantomSpec(3, (moll((0.0, 2.0)),))


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(1.2, 4), st.floats(0.1, 1.0), st.floats(-5, 5),
       st.floats(-10, 10), st.floats(-10, 1.0))
def test_support_below_lowest_point(cx, cy, radius, amp, x, y):
    radius = min(radius, cy - 0.05)
    ph = PhantomSpec(2, (moll((cx, cy), radius, amp),))
    y = min(y, cy - radius)
    assert eval_phantom(ph, [x, y]) == 0.0


def test_mollifier_smooth_across_boundary():
    # first and second differences die out towards r=1 instead of jumping there
    ph = PhantomSpec(2, (moll((0.0, 2.0)),))
    h = 1e-3
    r = np.arange(0.0, 1.1, h)
    v = eval_phantom(ph, np.stack([r, np.full_like(r, 2.0)], axis=1))
    d1 = np.abs(np.diff(v)) / h
    d2 = np.abs(np.diff(v, 2)) / h**2
    assert d1[r[:-1] > 0.98].max() < 1e-5 * d1.max()
    assert d2[r[:-2] > 0.98].max() < 1e-5 * d2.max()
