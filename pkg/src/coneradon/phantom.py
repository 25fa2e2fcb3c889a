"""Smooth, compactly supported test functions in the upper half space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import VolumeField, VolumeGrid, check_dim
from .errors import DomainError, ShapeError, SupportError

MOLLIFIER = "mollifier"
GAUSSIAN = "truncated-gaussian"
KINDS = (MOLLIFIER, GAUSSIAN)
KIND_CODES = {MOLLIFIER: 0, GAUSSIAN: 1}


@dataclass(frozen=True)
class Bump:
    """One radially symmetric bump.

    For a mollifier ``radius`` is the support radius and the profile is
    ``amplitude * exp(1 - 1/(1 - r^2))``.  For a truncated Gaussian the profile
    is ``amplitude * exp(-|x - c|^2 / (2 sigma^2))`` cut off at ``radius``
    (``4 sigma`` when not given).
    """

    kind: str
    center: tuple[float, ...]
    radius: float | None = None
    amplitude: float = 1.0
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown bump kind {self.kind!r}; expected one of {KINDS}")
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        object.__setattr__(self, "center", center)
        if self.kind == GAUSSIAN:
            if self.sigma is None or not self.sigma > 0:
                raise DomainError("truncated-gaussian bump needs sigma > 0")
            object.__setattr__(self, "sigma", float(self.sigma))
            if self.radius is None:
                object.__setattr__(self, "radius", 4.0 * self.sigma)
        else:
            if self.sigma is not None:
                raise DomainError("sigma is only meaningful for truncated-gaussian bumps")
        if self.radius is None or not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"bump radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))
        if not math.isfinite(self.amplitude):
            raise DomainError("bump amplitude must be finite")
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if center[-1] - self.radius <= 0.0:
            raise SupportError(
                f"bump at {center} with radius {self.radius} reaches the vertex plane y=0"
            )

    @property
    def d(self) -> int:
        return len(self.center)

    def translated(self, shift: Sequence[float]) -> "Bump":
        c = tuple(ci + si for ci, si in zip(self.center, tuple(shift) + (0.0,)))
        return Bump(self.kind, c, self.radius, self.amplitude, self.sigma)

    def scaled(self, c: float) -> "Bump":
        sigma = None if self.sigma is None else self.sigma * c
        return Bump(self.kind, tuple(c * v for v in self.center), self.radius * c, self.amplitude, sigma)


@dataclass(frozen=True)
class PhantomSpec:
    d: int
    bumps: tuple[Bump, ...] = ()

    def __post_init__(self):
        check_dim(self.d)
        bumps = tuple(self.bumps)
        for b in bumps:
            if b.d != self.d:
                raise ShapeError(f"bump center {b.center} is not a point of R^{self.d}")
        object.__setattr__(self, "bumps", bumps)

    def __add__(self, other: "PhantomSpec") -> "PhantomSpec":
        if other.d != self.d:
            raise ShapeError("cannot join phantoms of different dimension")
        return PhantomSpec(self.d, self.bumps + other.bumps)

    def translated(self, shift) -> "PhantomSpec":
        return PhantomSpec(self.d, tuple(b.translated(shift) for b in self.bumps))

    def scaled(self, c: float) -> "PhantomSpec":
        """Phantom ``f(x/c, y/c)``."""
        return PhantomSpec(self.d, tuple(b.scaled(c) for b in self.bumps))

    def weighted(self, y_power: float) -> "WeightedPhantom":
        """The function ``y**y_power * f``."""
        return WeightedPhantom(self, float(y_power))

    def y_range(self) -> tuple[float, float]:
        if not self.bumps:
            return (math.inf, -math.inf)
        return (
            min(b.center[-1] - b.radius for b in self.bumps),
            max(b.center[-1] + b.radius for b in self.bumps),
        )

    def as_arrays(self):
        """Flat arrays for the compiled kernels: kinds, centers, radii, sigmas, amplitudes."""
        nb = len(self.bumps)
        kinds = np.array([KIND_CODES[b.kind] for b in self.bumps], dtype=np.int64)
        centers = np.array([b.center for b in self.bumps], dtype=float).reshape(nb, self.d)
        radii = np.array([b.radius for b in self.bumps], dtype=float)
        sigmas = np.array([b.sigma or 0.0 for b in self.bumps], dtype=float)
        amps = np.array([b.amplitude for b in self.bumps], dtype=float)
        return kinds, centers, radii, sigmas, amps


@dataclass(frozen=True)
class WeightedPhantom:
    """A phantom multiplied by ``y**y_power``; still supported away from y=0."""

    base: PhantomSpec
    y_power: float = 0.0

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def bumps(self):
        return self.base.bumps

    def y_range(self):
        return self.base.y_range()

    def translated(self, shift) -> "WeightedPhantom":
        return WeightedPhantom(self.base.translated(shift), self.y_power)


def as_weighted(phantom) -> WeightedPhantom:
    if isinstance(phantom, WeightedPhantom):
        return phantom
    if isinstance(phantom, PhantomSpec):
        return WeightedPhantom(phantom, 0.0)
    raise TypeError(f"expected a PhantomSpec, got {type(phantom).__name__}")


def _bump_values(b: Bump, pts: np.ndarray) -> np.ndarray:
    diff = pts - np.asarray(b.center)
    r2 = np.einsum("...i,...i->...", diff, diff)
    out = np.zeros(r2.shape)
    if b.kind == MOLLIFIER:
        t = r2 / (b.radius * b.radius)
        m = t < 1.0
        out[m] = b.amplitude * np.exp(1.0 - 1.0 / (1.0 - t[m]))
    else:
        m = r2 < b.radius * b.radius
        out[m] = b.amplitude * np.exp(-r2[m] / (2.0 * b.sigma * b.sigma))
    return out


def eval_phantom(phantom, points) -> np.ndarray | float:
    """Evaluate a phantom at points of shape ``(..., d)``."""
    wp = as_weighted(phantom)
    pts = np.asarray(points, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != wp.d:
        raise ShapeError(f"points must have trailing dimension {wp.d}")
    out = np.zeros(pts.shape[:-1])
    for b in wp.bumps:
        out += _bump_values(b, pts)
    if wp.y_power != 0.0:
        nz = out != 0.0
        out[nz] *= pts[..., -1][nz] ** wp.y_power
    return float(out[0]) if scalar else out


def check_support_inside(phantom, grid: VolumeGrid) -> None:
    lows = [lo for lo, _ in grid.extents]
    highs = [hi for _, hi in grid.extents]
    tol = 1e-12 * max(1.0, max(abs(v) for v in lows + highs))
    for b in as_weighted(phantom).bumps:
        for c, lo, hi in zip(b.center, lows, highs):
            if c - b.radius < lo - tol or c + b.radius > hi + tol:
                raise SupportError(f"bump at {b.center} (radius {b.radius}) is not inside the grid extents")


def rasterize(phantom, grid: VolumeGrid) -> VolumeField:
    """Sample a phantom at every node of ``grid``.

    Raises :class:`SupportError` when a bump's support pokes out of the grid,
    since the truncated field would silently differ from the phantom.
    """
    wp = as_weighted(phantom)
    if wp.d != grid.d:
        raise ShapeError("phantom and grid dimensions differ")
    check_support_inside(wp, grid)
    mesh = grid.mesh()
    pts = np.stack(mesh, axis=-1)
    return VolumeField(grid, eval_phantom(wp, pts))
