"""Conical Radon transform by quadrature over cone surfaces.

``R^(p) f(u, theta)`` integrates ``f`` over the one-sided cone with vertex
``(u, 0)``, axis ``e_d`` and half opening angle ``theta``, with the radial
weight ``s**-p``.  The ray parameter ``s`` is discretised with the trapezoid
rule on ``[0, s_max]`` and the cone's cross-sections with a
:class:`~coneradon.core.SphereQuadrature`.  Nodes where the integrand is known
to vanish (outside a bump's bounding shell) are skipped, which leaves the sum
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ConeSinogram, ConeSinogramGrid, SphereQuadrature, make_sphere_quadrature
from .errors import DomainError, ShapeError, TruncationError
from .phantom import GAUSSIAN, as_weighted


@dataclass(frozen=True)
class RayQuadratureConfig:
    s_max: float
    n_s: int

    def __post_init__(self):
        if not (self.s_max > 0 and math.isfinite(self.s_max)):
            raise DomainError(f"s_max must be positive, got {self.s_max}")
        if int(self.n_s) < 16:
            raise DomainError(f"n_s must be >= 16, got {self.n_s}")
        object.__setattr__(self, "n_s", int(self.n_s))
        object.__setattr__(self, "s_max", float(self.s_max))

    @property
    def ds(self) -> float:
        return self.s_max / (self.n_s - 1)


def _feature_size(phantom) -> float:
    sizes = []
    for b in as_weighted(phantom).bumps:
        sizes.append(b.radius if b.kind != GAUSSIAN else min(b.radius, 4.0 * b.sigma))
    return min(sizes) if sizes else 1.0


def auto_ray_config(phantom, theta_max: float, ds: float | None = None) -> RayQuadratureConfig:
    """Ray truncation past the highest support point plus a margin of one bump radius.

    The default node spacing is 1/64 of the smallest bump size, ample for the
    trapezoid rule on smooth profiles.
    """
    wp = as_weighted(phantom)
    feature = _feature_size(wp)
    if not wp.bumps:
        return RayQuadratureConfig(1.0, 16)
    y_hi = wp.y_range()[1]
    s_max = y_hi / math.cos(theta_max) + max(b.radius for b in wp.bumps)
    ds = feature / 64.0 if ds is None else float(ds)
    return RayQuadratureConfig(s_max, max(16, int(math.ceil(s_max / ds)) + 1))


def auto_sphere_quadrature(phantom, theta_max: float, ray_cfg: RayQuadratureConfig | None = None) -> SphereQuadrature:
    """Circle rule fine enough to resolve a bump on the widest cone cross-section."""
    wp = as_weighted(phantom)
    if wp.d == 2:
        return make_sphere_quadrature(2)
    if not wp.bumps:
        return make_sphere_quadrature(3, 64)
    rho_max = wp.y_range()[1] * math.tan(theta_max)
    n = int(math.ceil(2.0 * math.pi * rho_max / (_feature_size(wp) / 24.0)))
    n = max(256, 8 * ((n + 7) // 8))
    return make_sphere_quadrature(3, n)


def _check_equispaced(sq: SphereQuadrature):
    ref = make_sphere_quadrature(3, len(sq))
    if not np.allclose(sq.nodes, ref.nodes, atol=1e-12, rtol=0.0):
        raise DomainError("the forward projector needs the equispaced circle rule of make_sphere_quadrature")


def _check_truncation(wp, theta: float, ray_cfg: RayQuadratureConfig):
    if not wp.bumps:
        return
    y_hi = wp.y_range()[1]
    if ray_cfg.s_max * math.cos(theta) < y_hi:
        raise TruncationError(
            f"s_max={ray_cfg.s_max:g} stops below the support top y={y_hi:g} at theta={theta:g}; "
            f"need s_max >= {y_hi / math.cos(theta):g}"
        )


def _check_theta(theta: float):
    if not (0.0 < theta < math.pi / 2):
        raise DomainError(f"theta must lie in (0, pi/2), got {theta}")


def _prepare(phantom, theta_max, sphere_q, ray_cfg):
    wp = as_weighted(phantom)
    if ray_cfg is None:
        ray_cfg = auto_ray_config(wp, theta_max)
    if sphere_q is None:
        sphere_q = auto_sphere_quadrature(wp, theta_max, ray_cfg)
    if sphere_q.d != wp.d:
        raise ShapeError("sphere quadrature and phantom dimensions differ")
    if wp.d == 3:
        _check_equispaced(sphere_q)
    _check_truncation(wp, theta_max, ray_cfg)
    return wp, sphere_q, ray_cfg


def cone_integral(phantom, u, theta: float, p: float, sphere_q: SphereQuadrature | None = None,
                  ray_cfg: RayQuadratureConfig | None = None) -> float:
    """``R^(p) f(u, theta)`` for a single vertex ``u`` and angle ``theta``.

    ``phantom`` is a :class:`~coneradon.phantom.PhantomSpec` or a
    :class:`~coneradon.phantom.WeightedPhantom`.  Quadrature settings default
    to :func:`auto_ray_config` / :func:`auto_sphere_quadrature`.
    """
    theta = float(theta)
    _check_theta(theta)
    wp, sphere_q, ray_cfg = _prepare(phantom, theta, sphere_q, ray_cfg)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size != wp.d - 1:
        raise ShapeError(f"vertex must be a point of R^{wp.d - 1}")
    arrays = wp.base.as_arrays()
    if wp.d == 2:
        return float(_kernels.cone_2d(u[0], theta, float(p), wp.y_power, ray_cfg.ds, ray_cfg.n_s, *arrays))
    return float(_kernels.cone_3d(u[0], u[1], theta, float(p), wp.y_power, ray_cfg.ds, ray_cfg.n_s,
                                  len(sphere_q), np.ascontiguousarray(sphere_q.nodes[:, 0]),
                                  np.ascontiguousarray(sphere_q.nodes[:, 1]), *arrays))


def forward_project(phantom, sino_grid: ConeSinogramGrid, p: float, sphere_q: SphereQuadrature | None = None,
                    ray_cfg: RayQuadratureConfig | None = None) -> ConeSinogram:
    """Evaluate :func:`cone_integral` at every node of ``sino_grid``."""
    wp = as_weighted(phantom)
    if wp.d != sino_grid.d:
        raise ShapeError("phantom and sinogram grid dimensions differ")
    wp, sphere_q, ray_cfg = _prepare(wp, sino_grid.theta_extent[1], sphere_q, ray_cfg)
    arrays = wp.base.as_arrays()
    thetas = sino_grid.thetas()
    if wp.d == 2:
        (us,) = sino_grid.u_axes()
        vals = _kernels.forward_2d(us, thetas, float(p), wp.y_power, ray_cfg.ds, ray_cfg.n_s, *arrays)
    else:
        u1, u2 = sino_grid.u_axes()
        vals = _kernels.forward_3d(u1, u2, thetas, float(p), wp.y_power, ray_cfg.ds, ray_cfg.n_s,
                                   len(sphere_q), np.ascontiguousarray(sphere_q.nodes[:, 0]),
                                   np.ascontiguousarray(sphere_q.nodes[:, 1]), *arrays)
    return ConeSinogram(sino_grid, p, vals)


def lemma_deviation(phantom, sino_grid: ConeSinogramGrid, p: float, sphere_q=None, ray_cfg=None) -> float:
    """Normalised max deviation between ``R^(p) f`` and ``cos(theta)^p R^(0)(y^-p f)``.

    Both sides share the same s-nodes, so the result only reflects rounding.
    """
    wp = as_weighted(phantom)
    wp, sphere_q, ray_cfg = _prepare(wp, sino_grid.theta_extent[1], sphere_q, ray_cfg)
    lhs = forward_project(wp, sino_grid, p, sphere_q, ray_cfg).values
    rhs = forward_project(wp.base.weighted(wp.y_power - p), sino_grid, 0.0, sphere_q, ray_cfg).values
    rhs = rhs * np.cos(sino_grid.thetas()) ** p
    scale = np.max(np.abs(lhs))
    if scale == 0.0:
        return float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / scale)
