"""Fourier slice identity and the Fourier-Hankel reconstruction route.

With ``nu = (d-3)/2`` the identity reads

    H_nu F (y^(nu-p) f)(k, |k| tan t)
        = (2 pi)^((1-d)/2) cos(t)^(1-p) tan(t)^(-(d-1)/2) |k|^nu F R^(p) f(k, t)

where ``F`` is the Fourier transform along the vertex-plane axes and ``H_nu``
the order-``nu`` Hankel transform in y (kernel ``J_nu(lambda y) y dy``).
Inverting ``F`` and ``H_nu`` (the Hankel transform is its own inverse under
this normalisation) recovers ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConeSinogram, ConeSinogramGrid, VolumeField, VolumeGrid, check_dim
from .errors import DomainError, LatticeError, ShapeError, WeightError
from .transforms import hankel_kernel, hankel_transform, trapezoid_weights, window_profile

EPS = 1e-300


def hankel_order(d: int) -> float:
    return 0.5 * (check_dim(d) - 3)


def _periods(axes) -> np.ndarray:
    return np.array([ax.size * (ax[1] - ax[0]) for ax in axes])


def _lattice_index(k, periods, what: str) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != periods.shape:
        raise ShapeError(f"frequency must have {periods.size} components")
    m = k * periods / (2.0 * np.pi)
    mr = np.round(m)
    if np.any(np.abs(m - mr) > 1e-6 * np.maximum(1.0, np.abs(m))):
        raise LatticeError(f"k={k.tolist()} is not on the frequency lattice of the {what}")
    return mr.astype(np.int64)


def _dft_at(values: np.ndarray, axes, k) -> np.ndarray:
    """Continuous-normalised DFT over the leading ``len(axes)`` axes at one frequency."""
    out = values
    for ax, kj in zip(axes, k):
        ph = np.exp(-1j * kj * ax) * (ax[1] - ax[0])
        out = np.tensordot(ph, out, axes=(0, 0))
    return out


@dataclass(frozen=True)
class SliceSampleSet:
    """Sample points ``(k, theta)`` of the slice identity; ``ks`` has shape ``(n, d-1)``."""

    ks: np.ndarray
    thetas: np.ndarray

    def __post_init__(self):
        ks = np.atleast_2d(np.asarray(self.ks, dtype=float))
        th = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        if ks.shape[0] != th.size:
            raise ShapeError("one theta per frequency vector required")
        if np.any(np.linalg.norm(ks, axis=1) == 0.0):
            raise DomainError("the slice identity is not sampled at k = 0")
        if np.any((th <= 0.0) | (th >= 0.5 * math.pi)):
            raise DomainError("theta must lie in (0, pi/2)")
        ks.setflags(write=False)
        th.setflags(write=False)
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "thetas", th)

    def __len__(self):
        return self.thetas.size


def common_lattice(volume: VolumeGrid, sino: ConeSinogramGrid, band_fraction: float = 0.5) -> list[np.ndarray]:
    """Per-axis frequencies on both DFT lattices with ``|k_j| <= band * k_Nyquist``."""
    if volume.d != sino.d:
        raise ShapeError("volume and sinogram dimensions differ")
    out = []
    for xa, ua in zip(volume.x_axes(), sino.u_axes()):
        px, pu = _periods([xa])[0], _periods([ua])[0]
        kmax = band_fraction * min(math.pi / (xa[1] - xa[0]), math.pi / (ua[1] - ua[0]))
        mmax = int(math.floor(kmax * px / (2.0 * math.pi)))
        ms = np.arange(-mmax, mmax + 1)
        ratio = ms * pu / px
        keep = np.abs(ratio - np.round(ratio)) < 1e-6
        out.append(2.0 * np.pi * ms[keep] / px)
    return out


def random_slice_samples(volume: VolumeGrid, sino: ConeSinogramGrid, n: int, band_fraction: float = 0.5,
                         seed: int = 0) -> SliceSampleSet:
    """Random samples on the common frequency lattice with ``0 < |k| <= band * k_Nyquist``.

    Angles are drawn from the interior theta-nodes of ``sino`` so the
    right-hand side needs no interpolation.
    """
    rng = np.random.default_rng(seed)
    axes = common_lattice(volume, sino, band_fraction)
    kmax = band_fraction * min(min(math.pi / h for h in volume.spacing[:-1]), min(math.pi / h for h in sino.u_spacing))
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    norm = np.linalg.norm(mesh, axis=1)
    cand = mesh[(norm > 0) & (norm <= kmax * (1 + 1e-12))]
    if cand.shape[0] == 0:
        raise LatticeError("the volume and sinogram grids share no nonzero frequency within the band")
    thetas = sino.thetas()[1:-1]
    ks = cand[rng.integers(0, cand.shape[0], size=n)]
    th = thetas[rng.integers(0, thetas.size, size=n)]
    return SliceSampleSet(ks, th)


def slice_lhs(f: VolumeField, k, theta: float, p: float) -> complex:
    """``H_nu F (y^(nu-p) f)`` at ``(k, |k| tan theta)``; ``k`` must lie on the field's lattice."""
    grid = f.grid
    nu = hankel_order(grid.d)
    xaxes = grid.x_axes()
    k = np.atleast_1d(np.asarray(k, dtype=float))
    _lattice_index(k, _periods(xaxes), "volume grid")
    if not (0.0 < theta < 0.5 * math.pi):
        raise DomainError("theta must lie in (0, pi/2)")
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise DomainError("the slice identity is not sampled at k = 0")
    ys = grid.y_axis()
    col = _dft_at(f.values, xaxes, k) * ys ** (nu - p)
    return complex(hankel_transform(nu, col, ys, [kn * math.tan(theta)])[0])


def _rhs_prefactor(d: int, p: float, kn, theta):
    nu = hankel_order(d)
    return ((2.0 * math.pi) ** (0.5 * (1 - d)) * np.cos(theta) ** (1.0 - p)
            / np.tan(theta) ** (0.5 * (d - 1)) * kn**nu)


def _theta_interp(values: np.ndarray, grid: ConeSinogramGrid, theta):
    # linear interpolation along the last axis, plus a mask of in-range angles
    t0 = grid.theta_extent[0]
    dt = grid.theta_spacing
    nt = grid.n_theta
    pos = (np.asarray(theta, dtype=float) - t0) / dt
    inside = (pos >= -1e-9) & (pos <= nt - 1 + 1e-9)
    pos = np.clip(pos, 0.0, nt - 1)
    j = np.minimum(pos.astype(np.int64), nt - 2)
    a = pos - j
    v = (1.0 - a) * np.take(values, j, axis=-1) + a * np.take(values, j + 1, axis=-1)
    return v, inside


def slice_rhs(g: ConeSinogram, k, theta: float) -> complex:
    """Right-hand side of the slice identity, linear in theta between sinogram nodes."""
    grid = g.grid
    uaxes = grid.u_axes()
    k = np.atleast_1d(np.asarray(k, dtype=float))
    _lattice_index(k, _periods(uaxes), "sinogram grid")
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise DomainError("the slice identity is not sampled at k = 0")
    t0, t1 = grid.theta_extent
    if not (t0 <= theta <= t1):
        raise DomainError(f"theta={theta} outside the sinogram range [{t0}, {t1}]")
    row = _dft_at(g.values, uaxes, k)
    v, _ = _theta_interp(row, grid, np.array([theta]))
    return complex(v[0] * _rhs_prefactor(grid.d, g.p, kn, theta))


@dataclass(frozen=True)
class SliceReport:
    ks: np.ndarray
    thetas: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    rel_err: np.ndarray

    @property
    def max_error(self) -> float:
        return float(np.max(self.rel_err)) if self.rel_err.size else 0.0

    @property
    def median_error(self) -> float:
        return float(np.median(self.rel_err)) if self.rel_err.size else 0.0

    def to_table(self) -> str:
        lines = ["k\ttheta\t|lhs|\t|rhs|\trel_err"]
        for k, t, a, b, e in zip(self.ks, self.thetas, self.lhs, self.rhs, self.rel_err):
            ktxt = ",".join(f"{v:.6g}" for v in k)
            lines.append(f"{ktxt}\t{t:.6g}\t{abs(a):.6e}\t{abs(b):.6e}\t{e:.3e}")
        lines.append(f"max_rel_err = {self.max_error:.6e}")
        lines.append(f"median_rel_err = {self.median_error:.6e}")
        return "\n".join(lines)


def check_slice_identity(f: VolumeField, g: ConeSinogram, samples: SliceSampleSet, p: float | None = None) -> SliceReport:
    """Evaluate both sides at every sample; error is ``|lhs - rhs| / (|lhs| + eps)``."""
    if f.grid.d != g.grid.d:
        raise ShapeError("field and sinogram dimensions differ")
    if p is not None and float(p) != float(g.p):
        raise WeightError(f"sinogram carries p={g.p}, check requested p={p}")
    n = len(samples)
    lhs = np.empty(n, dtype=complex)
    rhs = np.empty(n, dtype=complex)
    for i in range(n):
        lhs[i] = slice_lhs(f, samples.ks[i], samples.thetas[i], g.p)
        rhs[i] = slice_rhs(g, samples.ks[i], samples.thetas[i])
    num = np.abs(lhs - rhs)
    err = np.where(num == 0.0, 0.0, num / (np.abs(lhs) + EPS))
    return SliceReport(samples.ks, samples.thetas, lhs, rhs, err)


def reconstruct_fourier_hankel(g: ConeSinogram, grid: VolumeGrid, config=None, n_lambda: int | None = None) -> VolumeField:
    """Reconstruction by resampling the slice identity and inverting ``F`` and ``H_nu``.

    The data are Fourier transformed along u, interpolated linearly in theta
    onto a uniform lambda-grid shared by all frequencies, Hankel inverted onto
    the grid's y-nodes and finally summed back to the grid's x-nodes.  The
    ``k = 0`` column is left at zero.  ``n_lambda`` defaults to
    ``max(2 n_y, 32 lambda_max y_max / pi)``: ``G`` jumps to zero at the
    edge of the sampled angle range, so the lambda quadrature only converges
    at first order and needs many nodes per oscillation of ``J_nu(lambda y)``.
    """
    from .reconstruct import ReconstructionConfig

    config = ReconstructionConfig(method="fourier-hankel") if config is None else config
    d = check_dim(g.grid.d)
    if grid.d != d:
        raise ShapeError("sinogram and volume grid dimensions differ")
    p = float(g.p)
    nu = hankel_order(d)
    sg = g.grid
    fc = config.filter
    spacings = sg.u_spacing
    counts = sg.n_u
    naxes = d - 1

    spec = np.fft.fftn(g.values, axes=tuple(range(naxes))) * math.prod(spacings)
    kax = [2.0 * np.pi * np.fft.fftfreq(n, h) for n, h in zip(counts, spacings)]
    for j, (ua, ka) in enumerate(zip(sg.u_axes(), kax)):
        sh = [1] * spec.ndim
        sh[j] = ka.size
        spec = spec * np.exp(-1j * ka * ua[0]).reshape(sh)
    kmesh = np.meshgrid(*kax, indexing="ij")
    kn = np.sqrt(sum(k * k for k in kmesh))
    kcut = fc.band_fraction * min(math.pi / h for h in spacings)
    wk = window_profile(kn, kcut, fc.window)
    for j, n in enumerate(counts):
        if n % 2 == 0:
            idx = [slice(None)] * naxes
            idx[j] = n // 2
            wk[tuple(idx)] = 0.0
    wk[(0,) * naxes] = 0.0

    t0, t1 = sg.theta_extent
    lam_max = kcut * math.tan(t1)
    ys = grid.y_axis()
    if n_lambda is None:
        n_lambda = max(2 * ys.size, int(math.ceil(32.0 * lam_max * ys[-1] / math.pi)) + 1)
    lams = np.linspace(0.0, lam_max, int(n_lambda))

    flat_spec = spec.reshape(-1, sg.n_theta)
    flat_k = kn.ravel()
    flat_w = wk.ravel()
    active = np.nonzero(flat_w != 0.0)[0]
    ka = flat_k[active][:, None]
    # the lambda = 0 node sits at theta = 0, outside every sinogram
    lam_pos = lams[1:][None, :]
    theta = np.arctan(lam_pos / ka)
    G = np.zeros((active.size, lams.size), dtype=complex)
    chunk = max(1, 2_000_000 // max(1, lams.size))
    for s in range(0, active.size, chunk):
        sl = slice(s, s + chunk)
        rows = flat_spec[active[sl]]
        th = theta[sl]
        pos = (th - t0) / sg.theta_spacing
        inside = (pos >= 0.0) & (pos <= sg.n_theta - 1)
        pos = np.clip(pos, 0.0, sg.n_theta - 1)
        j = np.minimum(pos.astype(np.int64), sg.n_theta - 2)
        a = pos - j
        v = (1.0 - a) * np.take_along_axis(rows, j, axis=1) + a * np.take_along_axis(rows, j + 1, axis=1)
        pref = _rhs_prefactor(d, p, ka[sl], th)
        G[sl, 1:] = np.where(inside, v * pref, 0.0) * flat_w[active[sl]][:, None]

    # inverse Hankel transform onto the y-nodes: sum_l G(k, l) J_nu(l y) l dl
    kern = hankel_kernel(nu, lams[1:], ys).T * trapezoid_weights(lams)[1:, None]
    H = G[:, 1:] @ kern

    # inverse Fourier sum onto the grid x-nodes
    full = np.zeros((flat_k.size, ys.size), dtype=complex)
    full[active] = H
    full = full.reshape(tuple(counts) + (ys.size,))
    out = full
    for ka_, xa, h, n in zip(kax, grid.x_axes(), spacings, counts):
        dk = 2.0 * np.pi / (n * h)
        ph = np.exp(1j * np.outer(xa, ka_)) * (dk / (2.0 * np.pi))
        out = np.tensordot(ph, out, axes=(1, 0))
        out = np.moveaxis(out, 0, -1)
    # after the loop the x axes sit last; restore (x..., y) order
    out = np.moveaxis(out, 0, -1)
    vals = out.real / ys ** (nu - p)
    return VolumeField(grid, vals)
