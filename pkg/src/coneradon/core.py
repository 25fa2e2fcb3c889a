"""Grids, fields, sinograms and sphere quadratures shared by every module.

Conventions used throughout the package:

* Points of the upper half space are written ``(x, y)`` with ``x`` in
  ``R^(d-1)`` and ``y > 0``.  Field arrays are indexed ``[i_x1, (i_x2,) i_y]``,
  so ``y`` is the fastest axis.
* Sinogram arrays are indexed ``[i_u1, (i_u2,) i_theta]``; ``theta`` is the
  fastest axis.
* All grids are uniform with both endpoints included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, ShapeError, UnsupportedDimensionError, WeightError

SUPPORTED_DIMS = (2, 3)


def check_dim(d: int) -> int:
    if d not in SUPPORTED_DIMS:
        raise UnsupportedDimensionError(f"dimension d={d} is not supported (use 2 or 3)")
    return int(d)


def _pairs(extent, naxes: int, name: str) -> tuple[tuple[float, float], ...]:
    arr = np.asarray(extent, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (naxes, 1))
    if arr.shape != (naxes, 2):
        raise ShapeError(f"{name} needs {naxes} (lo, hi) pair(s), got shape {arr.shape}")
    out = tuple((float(lo), float(hi)) for lo, hi in arr)
    for lo, hi in out:
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise DomainError(f"{name} must have positive length, got [{lo}, {hi}]")
    return out


def _counts(n, naxes: int, name: str) -> tuple[int, ...]:
    if np.isscalar(n):
        n = (n,) * naxes
    out = tuple(int(v) for v in n)
    if len(out) != naxes:
        raise ShapeError(f"{name} needs {naxes} count(s), got {len(out)}")
    if any(v < 2 for v in out):
        raise DomainError(f"{name} must be >= 2 on every axis, got {out}")
    return out


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float, copy=True)
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class VolumeGrid:
    """Regular sampling grid of ``R^(d-1) x [y_min, y_max]`` with ``y_min > 0``."""

    d: int
    x_extent: tuple[tuple[float, float], ...]
    y_extent: tuple[float, float]
    n_x: tuple[int, ...]
    n_y: int

    def __post_init__(self):
        d = check_dim(self.d)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "x_extent", _pairs(self.x_extent, d - 1, "x_extent"))
        (y_ext,) = _pairs(self.y_extent, 1, "y_extent")
        if y_ext[0] <= 0.0:
            raise DomainError(f"y_min must be > 0 (support above the vertex plane), got {y_ext[0]}")
        object.__setattr__(self, "y_extent", y_ext)
        object.__setattr__(self, "n_x", _counts(self.n_x, d - 1, "n_x"))
        (n_y,) = _counts(self.n_y, 1, "n_y")
        object.__setattr__(self, "n_y", n_y)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_x + (self.n_y,)

    @property
    def extents(self) -> tuple[tuple[float, float], ...]:
        return self.x_extent + (self.y_extent,)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.extents, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def x_axes(self) -> list[np.ndarray]:
        return [_axis(lo, hi, n) for (lo, hi), n in zip(self.x_extent, self.n_x)]

    def y_axis(self) -> np.ndarray:
        return _axis(self.y_extent[0], self.y_extent[1], self.n_y)

    def axes(self) -> list[np.ndarray]:
        return self.x_axes() + [self.y_axis()]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All node coordinates as an ``(N, d)`` array in C order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def translated(self, shift: Sequence[float]) -> "VolumeGrid":
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.d - 1,))
        ext = tuple((lo + a, hi + a) for (lo, hi), a in zip(self.x_extent, shift))
        return VolumeGrid(self.d, ext, self.y_extent, self.n_x, self.n_y)


@dataclass(frozen=True)
class ConeSinogramGrid:
    """Regular ``(u, theta)`` grid with ``0 < theta_min < theta_max < pi/2``."""

    d: int
    u_extent: tuple[tuple[float, float], ...]
    n_u: tuple[int, ...]
    theta_extent: tuple[float, float]
    n_theta: int

    def __post_init__(self):
        d = check_dim(self.d)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "u_extent", _pairs(self.u_extent, d - 1, "u_extent"))
        object.__setattr__(self, "n_u", _counts(self.n_u, d - 1, "n_u"))
        (th,) = _pairs(self.theta_extent, 1, "theta_extent")
        if not (0.0 < th[0] < th[1] < math.pi / 2):
            raise DomainError(f"theta extent must satisfy 0 < theta_min < theta_max < pi/2, got {th}")
        object.__setattr__(self, "theta_extent", th)
        (n_t,) = _counts(self.n_theta, 1, "n_theta")
        object.__setattr__(self, "n_theta", n_t)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_u + (self.n_theta,)

    @property
    def u_spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.u_extent, self.n_u))

    @property
    def theta_spacing(self) -> float:
        lo, hi = self.theta_extent
        return (hi - lo) / (self.n_theta - 1)

    def u_axes(self) -> list[np.ndarray]:
        return [_axis(lo, hi, n) for (lo, hi), n in zip(self.u_extent, self.n_u)]

    def thetas(self) -> np.ndarray:
        return _axis(self.theta_extent[0], self.theta_extent[1], self.n_theta)

    def axes(self) -> list[np.ndarray]:
        return self.u_axes() + [self.thetas()]

    def translated(self, shift: Sequence[float]) -> "ConeSinogramGrid":
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.d - 1,))
        ext = tuple((lo + a, hi + a) for (lo, hi), a in zip(self.u_extent, shift))
        return ConeSinogramGrid(self.d, ext, self.n_u, self.theta_extent, self.n_theta)

    def refined_u(self, factor: int) -> "ConeSinogramGrid":
        """Same extents with ``factor`` times finer u-spacing."""
        n_u = tuple((n - 1) * factor + 1 for n in self.n_u)
        return ConeSinogramGrid(self.d, self.u_extent, n_u, self.theta_extent, self.n_theta)


@dataclass(frozen=True, eq=False)
class VolumeField:
    """Samples of a function on a :class:`VolumeGrid` (read-only)."""

    grid: VolumeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size != math.prod(self.grid.shape):
            raise ShapeError(f"field needs {math.prod(self.grid.shape)} values, got {vals.size}")
        object.__setattr__(self, "values", _frozen(vals.reshape(self.grid.shape)))

    def _check(self, other: "VolumeField"):
        if not isinstance(other, VolumeField) or other.grid != self.grid:
            raise ShapeError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return VolumeField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return VolumeField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return VolumeField(self.grid, self.values * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ConeSinogram:
    """Samples of ``R^(p) f`` on a :class:`ConeSinogramGrid`, tagged with ``p``."""

    grid: ConeSinogramGrid
    p: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size != math.prod(self.grid.shape):
            raise ShapeError(f"sinogram needs {math.prod(self.grid.shape)} values, got {vals.size}")
        if not math.isfinite(float(self.p)):
            raise DomainError(f"p must be finite, got {self.p}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "values", _frozen(vals.reshape(self.grid.shape)))

    def _check(self, other: "ConeSinogram"):
        if not isinstance(other, ConeSinogram) or other.grid != self.grid:
            raise ShapeError("sinograms live on different grids")
        if other.p != self.p:
            raise WeightError(f"cannot combine sinograms with p={self.p} and p={other.p}")

    def __add__(self, other):
        self._check(other)
        return ConeSinogram(self.grid, self.p, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return ConeSinogram(self.grid, self.p, self.values - other.values)

    def __mul__(self, scalar):
        return ConeSinogram(self.grid, self.p, self.values * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes and weights for the surface measure on ``S^(d-2)``."""

    d: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        check_dim(self.d)
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.d - 1)
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape[0] != weights.size:
            raise ShapeError("one weight per node required")
        if np.any(weights <= 0):
            raise DomainError("sphere weights must be positive")
        if np.any(np.abs(np.linalg.norm(nodes, axis=1) - 1.0) > 1e-12):
            raise DomainError("sphere nodes must be unit vectors")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "weights", _frozen(weights))

    def __len__(self):
        return self.weights.size

    def integrate(self, values) -> float:
        """Apply the rule to samples of a function at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


def make_sphere_quadrature(d: int, n: int = 64) -> SphereQuadrature:
    """Counting measure on ``{+1, -1}`` for d=2; ``n`` equispaced angles for d=3."""
    check_dim(d)
    if d == 2:
        return SphereQuadrature(2, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    n = int(n)
    if n < 1:
        raise DomainError(f"need at least one node, got {n}")
    phi = 2.0 * np.pi * np.arange(n) / n
    return SphereQuadrature(3, np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(n, 2.0 * np.pi / n))


def grid_coordinates(grid, index) -> tuple[float, ...]:
    """Coordinates of the node with the given multi-index.

    Works for both :class:`VolumeGrid` (returns ``(x..., y)``) and
    :class:`ConeSinogramGrid` (returns ``(u..., theta)``).
    """
    index = tuple(int(i) for i in np.atleast_1d(index))
    shape = grid.shape
    if len(index) != len(shape):
        raise IndexError(f"expected a {len(shape)}-index, got {index}")
    coords = []
    for i, n, ax in zip(index, shape, grid.axes()):
        if not 0 <= i < n:
            raise IndexError(f"index {index} out of range for shape {shape}")
        coords.append(float(ax[i]))
    return tuple(coords)


def nearest_index(grid, point) -> tuple[int, ...]:
    """Inverse of :func:`grid_coordinates` up to rounding to the nearest node."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    lows = [ax[0] for ax in grid.axes()]
    steps = [ax[1] - ax[0] for ax in grid.axes()]
    idx = []
    for c, lo, h, n in zip(point, lows, steps, grid.shape):
        i = int(round((c - lo) / h))
        if not 0 <= i < n:
            raise IndexError(f"point {tuple(point)} lies outside the grid")
        idx.append(i)
    return tuple(idx)


def field_l2_error(a: VolumeField, b: VolumeField) -> tuple[float, float]:
    """Absolute and relative discrete L2 error of ``a`` against reference ``b``."""
    if a.grid != b.grid:
        raise ShapeError("field_l2_error needs identical grids")
    w = a.grid.cell_volume
    err = math.sqrt(w * float(np.sum((a.values - b.values) ** 2)))
    ref = math.sqrt(w * float(np.sum(b.values**2)))
    if ref == 0.0:
        return err, (0.0 if err == 0.0 else math.inf)
    return err, err / ref
