"""Filtered back-projection for the conical Radon transform.

The filter is the Riesz multiplier ``|k|^(d-1)`` (``d_u H_u`` in d=2,
``-Laplace_u`` in d=3); its sign is absorbed so both back-projections carry the
constant ``1/(2 pi)^(d-1)``.  The angular form integrates over cone angle and
direction, the spatial form over vertices; they are the same integral under
``theta = arctan(|u - x| / y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import ConeSinogram, VolumeField, VolumeGrid, check_dim, make_sphere_quadrature
from .errors import DomainError, ShapeError, WeightError
from .transforms import FilterConfig, riesz_potential, trapezoid_weights

METHODS = ("fbp-angular", "fbp-spatial", "fourier-hankel")
INTERPOLATIONS = ("linear",)


@dataclass(frozen=True)
class ReconstructionConfig:
    method: str = "fbp-angular"
    filter: FilterConfig = field(default_factory=FilterConfig)
    interpolation: str = "linear"
    sphere_nodes: int = 64

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.interpolation not in INTERPOLATIONS:
            raise DomainError(f"interpolation must be one of {INTERPOLATIONS}, got {self.interpolation!r}")
        if int(self.sphere_nodes) < 8:
            raise DomainError(f"sphere_nodes must be >= 8, got {self.sphere_nodes}")
        object.__setattr__(self, "sphere_nodes", int(self.sphere_nodes))


def filter_sinogram(g: ConeSinogram, config: FilterConfig | None = None) -> ConeSinogram:
    """Riesz filtering of every theta-slice; the weight tag ``p`` is carried over."""
    check_dim(g.grid.d)
    return riesz_potential(g, config)


def _check_pair(q: ConeSinogram, grid: VolumeGrid, p: float):
    if q.grid.d != grid.d:
        raise ShapeError("sinogram and volume grid dimensions differ")
    if float(q.p) != float(p):
        raise WeightError(f"sinogram carries p={q.p} but back-projection was asked for p={p}")


def _bp_const(d: int) -> float:
    return 1.0 / (2.0 * math.pi) ** (d - 1)


def backproject_angular(q: ConeSinogram, grid: VolumeGrid, p: float, sphere_nodes: int = 64) -> VolumeField:
    """Back-projection over cone angle and cross-section direction.

    The theta integral uses the trapezoid rule on the sinogram's theta-grid,
    the direction integral ``make_sphere_quadrature(d, sphere_nodes)``; data
    are interpolated multilinearly in u and read as 0 outside the u-extent.
    """
    _check_pair(q, grid, p)
    d = grid.d
    thetas = q.grid.thetas()
    wtheta = trapezoid_weights(thetas) * np.cos(thetas) ** (-(1.0 + p))
    tans = np.tan(thetas)
    sq = make_sphere_quadrature(d, sphere_nodes)
    ys = grid.y_axis()
    const = _bp_const(d)
    vals = np.ascontiguousarray(q.values)
    if d == 2:
        (us,) = q.grid.u_axes()
        (xs,) = grid.x_axes()
        out = _kernels.backproject_angular_2d(vals, us[0], us[1] - us[0], tans, wtheta,
                                              np.ascontiguousarray(sq.nodes[:, 0]), sq.weights,
                                              xs, ys, float(p), const)
    else:
        u1, u2 = q.grid.u_axes()
        x1, x2 = grid.x_axes()
        out = _kernels.backproject_angular_3d(vals, u1[0], u1[1] - u1[0], u2[0], u2[1] - u2[0], tans, wtheta,
                                              np.ascontiguousarray(sq.nodes[:, 0]),
                                              np.ascontiguousarray(sq.nodes[:, 1]), sq.weights,
                                              x1, x2, ys, float(p), const)
    return VolumeField(grid, out)


def backproject_spatial(q: ConeSinogram, grid: VolumeGrid, p: float) -> VolumeField:
    """Back-projection over cone vertices.

    Trapezoid rule over the u-grid, linear interpolation in theta at
    ``arctan(|u - x| / y)``; angles outside the sinogram's theta-range read as
    0.  In d=3 the cell holding the ``1/|u - x|`` singularity is integrated
    exactly.
    """
    _check_pair(q, grid, p)
    d = grid.d
    t0, t1 = q.grid.theta_extent
    dt = q.grid.theta_spacing
    ys = grid.y_axis()
    const = _bp_const(d)
    vals = np.ascontiguousarray(q.values)
    if d == 2:
        (us,) = q.grid.u_axes()
        (xs,) = grid.x_axes()
        out = _kernels.backproject_spatial_2d(vals, us, trapezoid_weights(us), t0, dt, xs, ys, float(p), const)
    else:
        u1, u2 = q.grid.u_axes()
        x1, x2 = grid.x_axes()
        out = _kernels.backproject_spatial_3d(vals, u1, u2, trapezoid_weights(u1), trapezoid_weights(u2),
                                              t0, dt, x1, x2, ys, float(p), const)
    return VolumeField(grid, out)


def reconstruct_fbp(g: ConeSinogram, grid: VolumeGrid, config: ReconstructionConfig | None = None) -> VolumeField:
    """Filter, then back-project with the method chosen in ``config``."""
    config = ReconstructionConfig() if config is None else config
    if config.method not in ("fbp-angular", "fbp-spatial"):
        raise DomainError(f"reconstruct_fbp handles fbp-angular and fbp-spatial, not {config.method!r}")
    q = filter_sinogram(g, config.filter)
    if config.method == "fbp-angular":
        return backproject_angular(q, grid, g.p, config.sphere_nodes)
    return backproject_spatial(q, grid, g.p)


def reconstruct(g: ConeSinogram, grid: VolumeGrid, config: ReconstructionConfig | None = None) -> VolumeField:
    """Dispatch on ``config.method``."""
    config = ReconstructionConfig() if config is None else config
    if config.method == "fourier-hankel":
        from .fourier_slice import reconstruct_fourier_hankel

        return reconstruct_fourier_hankel(g, grid, config)
    return reconstruct_fbp(g, grid, config)
