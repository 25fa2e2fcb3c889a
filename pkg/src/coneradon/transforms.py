"""Spectral primitives along the vertex-plane axes, Hankel transforms and Bessel functions.

Discrete Fourier transforms use the continuous normalisation
``F g(k) ~ sum_j g(u_j) exp(-i k u_j) du`` on the lattice
``k_m = 2 pi m / (N du)``; the inverse carries ``dk / (2 pi)`` per axis.  With
this scaling the constants of the inversion formulas apply unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ConeSinogram, check_dim
from .errors import DomainError, ShapeError

WINDOWS = ("none", "cosine", "hann")


@dataclass(frozen=True)
class FilterConfig:
    """Regularisation of the unbounded ``|k|^(d-1)`` multiplier.

    ``upsample`` > 1 evaluates the filtered data on a u-grid that many times
    finer (exact band-limited interpolation) so the later multilinear
    interpolation works on densely sampled data.
    """

    band_fraction: float = 0.9
    window: str = "cosine"
    pad_factor: int = 2
    upsample: int = 1

    def __post_init__(self):
        if not (0.0 < self.band_fraction <= 1.0):
            raise DomainError(f"band_fraction must lie in (0, 1], got {self.band_fraction}")
        if self.window not in WINDOWS:
            raise DomainError(f"window must be one of {WINDOWS}, got {self.window!r}")
        if self.pad_factor not in (1, 2, 4):
            raise DomainError(f"pad_factor must be 1, 2 or 4, got {self.pad_factor}")
        if self.upsample not in (1, 2, 4, 8):
            raise DomainError(f"upsample must be 1, 2, 4 or 8, got {self.upsample}")


@dataclass(frozen=True)
class SpectralGrid:
    counts: tuple[int, ...]
    spacings: tuple[float, ...]

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        spacings = tuple(float(h) for h in self.spacings)
        if len(counts) != len(spacings):
            raise ShapeError("one spacing per axis required")
        if any(h <= 0 for h in spacings):
            raise DomainError("spacings must be positive")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spacings", spacings)

    def frequencies(self) -> list[np.ndarray]:
        return [2.0 * np.pi * np.fft.fftfreq(n, h) for n, h in zip(self.counts, self.spacings)]

    def dk(self) -> tuple[float, ...]:
        return tuple(2.0 * np.pi / (n * h) for n, h in zip(self.counts, self.spacings))

    def nyquist(self) -> tuple[float, ...]:
        return tuple(np.pi / h for h in self.spacings)


def _axes(ndim_axes: int, axes):
    if axes is None:
        return tuple(range(-ndim_axes, 0))
    return tuple(axes)


def dft_forward(g, spacings: Sequence[float], axes=None, origins=None) -> np.ndarray:
    """Continuous-normalised DFT over ``axes`` (default: the last ``len(spacings)``).

    ``origins`` gives the physical coordinate of sample 0 per axis; its phase
    is included so the result approximates the Fourier integral in absolute
    coordinates.
    """
    spacings = tuple(float(h) for h in np.atleast_1d(spacings))
    axes = _axes(len(spacings), axes)
    g = np.asarray(g)
    if len(axes) != len(spacings):
        raise ShapeError("one spacing per transformed axis required")
    out = np.fft.fftn(g, axes=axes) * math.prod(spacings)
    if origins is not None:
        out = out * _origin_phase(g.shape, axes, spacings, origins, -1)
    return out


def dft_inverse(spectrum, spacings: Sequence[float], axes=None, origins=None) -> np.ndarray:
    """Inverse of :func:`dft_forward`; returns the real part."""
    spacings = tuple(float(h) for h in np.atleast_1d(spacings))
    axes = _axes(len(spacings), axes)
    spectrum = np.asarray(spectrum)
    if len(axes) != len(spacings):
        raise ShapeError("one spacing per transformed axis required")
    if origins is not None:
        spectrum = spectrum * _origin_phase(spectrum.shape, axes, spacings, origins, +1)
    return np.fft.ifftn(spectrum, axes=axes).real / math.prod(spacings)


def _origin_phase(shape, axes, spacings, origins, sign):
    origins = np.broadcast_to(np.asarray(origins, dtype=float), (len(axes),))
    phase = np.ones([1] * len(shape), dtype=complex)
    for ax, h, o in zip(axes, spacings, origins):
        n = shape[ax]
        k = 2.0 * np.pi * np.fft.fftfreq(n, h)
        sh = [1] * len(shape)
        sh[ax] = n
        phase = phase * np.exp(sign * 1j * k * o).reshape(sh)
    return phase


def _nyquist_mask(n: int) -> np.ndarray:
    m = np.ones(n)
    if n % 2 == 0:
        m[n // 2] = 0.0
    return m


def hilbert_1d(g, axis: int = -1) -> np.ndarray:
    """Hilbert transform via the multiplier ``-i sign(k)``; DC and Nyquist bins map to zero."""
    g = np.asarray(g, dtype=float)
    n = g.shape[axis]
    if n < 2:
        raise ShapeError("need at least two samples")
    k = np.fft.fftfreq(n)
    mult = -1j * np.sign(k) * _nyquist_mask(n)
    sh = [1] * g.ndim
    sh[axis] = n
    return np.fft.ifft(np.fft.fft(g, axis=axis) * mult.reshape(sh), axis=axis).real


def spectral_derivative_1d(g, spacing: float, axis: int = -1) -> np.ndarray:
    """Derivative via the multiplier ``i k``; the Nyquist bin is zeroed."""
    g = np.asarray(g, dtype=float)
    n = g.shape[axis]
    if n < 2:
        raise ShapeError("need at least two samples")
    k = 2.0 * np.pi * np.fft.fftfreq(n, spacing)
    mult = 1j * k * _nyquist_mask(n)
    sh = [1] * g.ndim
    sh[axis] = n
    return np.fft.ifft(np.fft.fft(g, axis=axis) * mult.reshape(sh), axis=axis).real


def window_profile(kabs: np.ndarray, cutoff: float, window: str) -> np.ndarray:
    """Apodisation ``W(|k|)``, zero beyond ``cutoff``."""
    inside = kabs <= cutoff
    t = np.where(inside, kabs / cutoff, 1.0)
    if window == "none":
        w = np.ones_like(t)
    elif window == "cosine":
        w = np.cos(0.5 * np.pi * t)
    elif window == "hann":
        w = 0.5 * (1.0 + np.cos(np.pi * t))
    else:
        raise DomainError(f"unknown window {window!r}")
    return np.where(inside, w, 0.0)


def riesz_multiplier(counts, spacings, d: int, config: FilterConfig) -> np.ndarray:
    """``|k|^(d-1) W(|k|)`` on the DFT lattice, with even-length Nyquist bins zeroed."""
    grid = SpectralGrid(counts, spacings)
    ks = grid.frequencies()
    mesh = np.meshgrid(*ks, indexing="ij")
    kabs = np.sqrt(sum(k * k for k in mesh))
    cutoff = config.band_fraction * min(grid.nyquist())
    mult = kabs ** (d - 1) * window_profile(kabs, cutoff, config.window)
    for ax, n in enumerate(grid.counts):
        sh = [1] * len(counts)
        sh[ax] = n
        mult = mult * _nyquist_mask(n).reshape(sh)
    return mult


def _zero_insert(spec: np.ndarray, axis: int, factor: int) -> np.ndarray:
    # place the spectrum of length m into length m*factor (Nyquist already zero)
    m = spec.shape[axis]
    npos = (m + 1) // 2
    nneg = m - npos
    if m % 2 == 0:
        nneg -= 1
    shape = list(spec.shape)
    shape[axis] = m * factor
    out = np.zeros(shape, dtype=spec.dtype)
    src = [slice(None)] * spec.ndim
    dst = [slice(None)] * spec.ndim
    src[axis] = slice(0, npos)
    dst[axis] = slice(0, npos)
    out[tuple(dst)] = spec[tuple(src)]
    if nneg:
        src[axis] = slice(m - nneg, m)
        dst[axis] = slice(m * factor - nneg, m * factor)
        out[tuple(dst)] = spec[tuple(src)]
    return out


def riesz_potential(g: ConeSinogram, config: FilterConfig | None = None) -> ConeSinogram:
    """Apply the Riesz potential ``I^(1-d)`` (multiplier ``|k|^(d-1)``) to every theta-slice.

    Each slice is zero-padded by ``config.pad_factor``, filtered, and cropped
    back to the original u-extent.  With ``config.upsample > 1`` the output
    lives on the correspondingly refined u-grid.
    """
    config = FilterConfig() if config is None else config
    d = check_dim(g.grid.d)
    naxes = d - 1
    axes = tuple(range(naxes))
    counts = tuple(n * config.pad_factor for n in g.grid.n_u)
    spacings = g.grid.u_spacing
    spec = np.fft.fftn(g.values, s=counts, axes=axes)
    mult = riesz_multiplier(counts, spacings, d, config)
    spec *= mult.reshape(mult.shape + (1,))
    up = config.upsample
    if up > 1:
        for ax in axes:
            spec = _zero_insert(spec, ax, up)
    vals = np.fft.ifftn(spec, axes=axes).real * up**naxes
    crop = tuple(slice(0, (n - 1) * up + 1) for n in g.grid.n_u)
    vals = vals[crop]
    return ConeSinogram(g.grid.refined_u(up) if up > 1 else g.grid, g.p, np.ascontiguousarray(vals))


# ---------------------------------------------------------------------------
# Bessel functions and Hankel transforms

_BESSEL_ORDERS = (-0.5, 0.0)


def _j0_miller(x: np.ndarray) -> np.ndarray:
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by J0 + 2 sum J_{2m} = 1
    top = int(x.max()) + 40
    top += top % 2
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    j0 = None
    for k in range(top, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        jp1, jk = jk, jm1
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * jk
        big = np.abs(jk) > 1e250
        if big.any():
            s = np.where(big, 1e-250, 1.0)
            jk *= s
            jp1 *= s
            norm *= s
    j0 = jk
    return j0 / (j0 + norm)


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel's expansion J0 = sqrt(2/(pi x)) (P cos(x - pi/4) - Q sin(x - pi/4))
    # a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k); P takes even k, Q odd k, signs alternate
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    a = 1.0
    for k in range(0, 20):
        if k > 0:
            a = a * (2 * k - 1) ** 2 / (k * 8.0)
        tk = a / x**k
        if k % 2 == 0:
            p += tk * (-1.0) ** (k // 2)
        else:
            q += tk * (-1.0) ** ((k - 1) // 2)
    ph = x - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(ph) + q * np.sin(ph))


def bessel_j(nu: float, x) -> np.ndarray | float:
    """Bessel function of the first kind for ``nu`` in ``{-1/2, 0}`` and ``x >= 0``.

    ``J_{-1/2}`` uses its closed form; ``J_0`` uses normalised backward
    recurrence below ``x = 25`` and Hankel's asymptotic expansion above.
    """
    if nu not in _BESSEL_ORDERS:
        raise DomainError(f"Bessel order {nu} not supported (use -1/2 or 0)")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if np.any(xa < 0) or np.any(~np.isfinite(xa)):
        raise DomainError("Bessel argument must be finite and >= 0")
    if nu == -0.5:
        if np.any(xa == 0):
            raise DomainError("J_{-1/2} is singular at x = 0")
        out = np.sqrt(2.0 / (np.pi * xa)) * np.cos(xa)
    else:
        out = np.empty_like(xa)
        tiny = xa < 1e-8
        out[tiny] = 1.0 - 0.25 * xa[tiny] ** 2
        mid = (~tiny) & (xa < 25.0)
        if mid.any():
            out[mid] = _j0_miller(xa[mid])
        large = xa >= 25.0
        if large.any():
            out[large] = _j0_asymptotic(xa[large])
    return float(out[0]) if scalar else out


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoid weights on a uniform grid."""
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def hankel_kernel(nu: float, ys: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    """Matrix ``K[i, j] = J_nu(lambda_i y_j) y_j`` with the closed form used for ``nu = -1/2``."""
    ys = np.asarray(ys, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    arg = np.outer(lambdas, ys)
    if nu == -0.5:
        if np.any(lambdas <= 0):
            raise DomainError("order -1/2 Hankel transform needs lambda > 0")
        # J_{-1/2}(lam y) y = sqrt(2 y / (pi lam)) cos(lam y), finite at y = 0
        return np.sqrt(2.0 * ys[None, :] / (np.pi * lambdas[:, None])) * np.cos(arg)
    return bessel_j(nu, arg.ravel()).reshape(arg.shape) * ys[None, :]


def hankel_transform(nu: float, g, ys, lambdas) -> np.ndarray:
    """``int J_nu(lambda y) g(y) y dy`` by the trapezoid rule over the samples ``ys``.

    ``g`` may carry extra leading axes; the last axis runs along ``ys``.
    """
    if nu not in _BESSEL_ORDERS:
        raise DomainError(f"Hankel order {nu} not supported (use -1/2 or 0)")
    ys = np.asarray(ys, dtype=float)
    g = np.asarray(g)
    if g.shape[-1] != ys.size:
        raise ShapeError("g must be sampled on ys along its last axis")
    if np.any(ys < 0):
        raise DomainError("Hankel transforms integrate over y >= 0")
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    kern = hankel_kernel(nu, ys, lambdas) * trapezoid_weights(ys)[None, :]
    return g @ kern.T
