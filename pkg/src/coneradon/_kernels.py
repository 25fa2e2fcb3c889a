"""Compiled inner loops (numba).

Every kernel parallelises over *output* nodes with ``prange`` and evaluates
each node with a fixed sequential loop, so results are bitwise identical for
any thread count.
"""

import math

import numba
import numpy as np
from numba import njit, prange

# the TBB layer is tried first by default and warns when the installed TBB is too old
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

TWO_PI = 2.0 * math.pi


def set_threads(n):
    """Cap the width of parallel loops; ``None`` keeps numba's default."""
    if n is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


# ---------------------------------------------------------------------------
# phantom evaluation


@njit(cache=True, inline="always")
def _bump_value(kind, r2, radius, sigma, amp):
    if r2 >= radius * radius:
        return 0.0
    if kind == 0:
        t = r2 / (radius * radius)
        return amp * math.exp(1.0 - 1.0 / (1.0 - t))
    return amp * math.exp(-r2 / (2.0 * sigma * sigma))


@njit(cache=True, inline="always")
def _s_weight(i, n_s, ds, s, p, y, y_power):
    w = ds
    if i == n_s - 1:
        w = 0.5 * ds
    if p != 0.0:
        w *= s ** (-p)
    if y_power != 0.0:
        w *= y ** y_power
    return w


@njit(cache=True)
def _s_range(cy, radius, ct, ds, n_s):
    # nodes whose height s*cos(theta) can fall inside [cy - radius, cy + radius]
    i0 = int(math.floor((cy - radius) / ct / ds)) - 1
    i1 = int(math.ceil((cy + radius) / ct / ds)) + 1
    if i0 < 1:
        i0 = 1
    if i1 > n_s - 1:
        i1 = n_s - 1
    return i0, i1


# ---------------------------------------------------------------------------
# forward projection


@njit(cache=True)
def cone_2d(u, theta, p, y_power, ds, n_s, kinds, centers, radii, sigmas, amps):
    st = math.sin(theta)
    ct = math.cos(theta)
    acc = 0.0
    for b in range(kinds.size):
        cx = centers[b, 0]
        cy = centers[b, 1]
        rad = radii[b]
        i0, i1 = _s_range(cy, rad, ct, ds, n_s)
        for i in range(i0, i1 + 1):
            s = i * ds
            y = s * ct
            dy2 = (y - cy) * (y - cy)
            if dy2 >= rad * rad:
                continue
            rho = s * st
            xp = u + rho - cx
            xm = u - rho - cx
            v = _bump_value(kinds[b], xp * xp + dy2, rad, sigmas[b], amps[b])
            v += _bump_value(kinds[b], xm * xm + dy2, rad, sigmas[b], amps[b])
            if v != 0.0:
                acc += _s_weight(i, n_s, ds, s, p, y, y_power) * v
    return acc


@njit(cache=True)
def cone_3d(u1, u2, theta, p, y_power, ds, n_s, n_phi, cphi, sphi,
            kinds, centers, radii, sigmas, amps):
    st = math.sin(theta)
    ct = math.cos(theta)
    dphi = TWO_PI / n_phi
    acc = 0.0
    for b in range(kinds.size):
        cx = centers[b, 0]
        cz = centers[b, 1]
        cy = centers[b, 2]
        rad = radii[b]
        ex = cx - u1
        ez = cz - u2
        dist = math.sqrt(ex * ex + ez * ez)
        phi0 = math.atan2(ez, ex)
        i0, i1 = _s_range(cy, rad, ct, ds, n_s)
        for i in range(i0, i1 + 1):
            s = i * ds
            y = s * ct
            dy2 = (y - cy) * (y - cy)
            ry2 = rad * rad - dy2
            if ry2 <= 0.0:
                continue
            rho = s * st
            # nodes on the circle of radius rho that can hit the disc of radius sqrt(ry2)
            if dist == 0.0:
                if rho * rho >= ry2:
                    continue
                k0 = 0
                k1 = n_phi - 1
            else:
                c = (rho * rho + dist * dist - ry2) / (2.0 * rho * dist)
                if c >= 1.0:
                    continue
                if c <= -1.0:
                    k0 = 0
                    k1 = n_phi - 1
                else:
                    half = math.acos(c)
                    k0 = int(math.floor((phi0 - half) / dphi)) - 1
                    k1 = int(math.ceil((phi0 + half) / dphi)) + 1
                    if k1 - k0 + 1 >= n_phi:
                        k0 = 0
                        k1 = n_phi - 1
            sub = 0.0
            for k in range(k0, k1 + 1):
                kk = k % n_phi
                px = u1 + rho * cphi[kk] - cx
                pz = u2 + rho * sphi[kk] - cz
                sub += _bump_value(kinds[b], px * px + pz * pz + dy2, rad, sigmas[b], amps[b])
            if sub != 0.0:
                acc += _s_weight(i, n_s, ds, s, p, y, y_power) * sub * dphi * rho
    return acc


@njit(parallel=True, cache=True)
def forward_2d(us, thetas, p, y_power, ds, n_s, kinds, centers, radii, sigmas, amps):
    nu = us.size
    nt = thetas.size
    out = np.zeros((nu, nt))
    for idx in prange(nu * nt):
        a = idx // nt
        j = idx % nt
        out[a, j] = cone_2d(us[a], thetas[j], p, y_power, ds, n_s, kinds, centers, radii, sigmas, amps)
    return out


@njit(parallel=True, cache=True)
def forward_3d(u1s, u2s, thetas, p, y_power, ds, n_s, n_phi, cphi, sphi,
               kinds, centers, radii, sigmas, amps):
    n1 = u1s.size
    n2 = u2s.size
    nt = thetas.size
    out = np.zeros((n1, n2, nt))
    for idx in prange(n1 * n2 * nt):
        a = idx // (n2 * nt)
        rem = idx % (n2 * nt)
        b = rem // nt
        j = rem % nt
        out[a, b, j] = cone_3d(u1s[a], u2s[b], thetas[j], p, y_power, ds, n_s, n_phi, cphi, sphi,
                               kinds, centers, radii, sigmas, amps)
    return out


# ---------------------------------------------------------------------------
# interpolation helpers


@njit(cache=True, inline="always")
def _lerp1(q, j, pos, n):
    # linear interpolation of q[:, j] at fractional index pos; zero outside
    if pos < 0.0 or pos > n - 1:
        return 0.0
    i = int(pos)
    if i > n - 2:
        i = n - 2
    a = pos - i
    return (1.0 - a) * q[i, j] + a * q[i + 1, j]


@njit(cache=True, inline="always")
def _lerp2(q, j, p1, p2, n1, n2):
    if p1 < 0.0 or p1 > n1 - 1 or p2 < 0.0 or p2 > n2 - 1:
        return 0.0
    i = int(p1)
    if i > n1 - 2:
        i = n1 - 2
    k = int(p2)
    if k > n2 - 2:
        k = n2 - 2
    a = p1 - i
    b = p2 - k
    return ((1.0 - a) * (1.0 - b) * q[i, k, j] + a * (1.0 - b) * q[i + 1, k, j]
            + (1.0 - a) * b * q[i, k + 1, j] + a * b * q[i + 1, k + 1, j])


# ---------------------------------------------------------------------------
# back-projection, angular parametrisation


@njit(parallel=True, cache=True)
def backproject_angular_2d(q, u0, du, tans, wtheta, nodes, wnodes, xs, ys, p, const):
    nu = q.shape[0]
    nt = tans.size
    nx = xs.size
    ny = ys.size
    out = np.zeros((nx, ny))
    for idx in prange(nx * ny):
        a = idx // ny
        c = idx % ny
        x = xs[a]
        y = ys[c]
        acc = 0.0
        for j in range(nt):
            r = y * tans[j]
            sub = 0.0
            for m in range(nodes.size):
                sub += wnodes[m] * _lerp1(q, j, (x + r * nodes[m] - u0) / du, nu)
            acc += wtheta[j] * sub
        if p != 0.0:
            acc *= y**p
        out[a, c] = acc * const
    return out


@njit(parallel=True, cache=True)
def backproject_angular_3d(q, u10, du1, u20, du2, tans, wtheta, n1s, n2s, wnodes,
                           x1s, x2s, ys, p, const):
    nu1 = q.shape[0]
    nu2 = q.shape[1]
    nt = tans.size
    nx1 = x1s.size
    nx2 = x2s.size
    ny = ys.size
    nn = wnodes.size
    out = np.zeros((nx1, nx2, ny))
    for idx in prange(nx1 * nx2 * ny):
        a = idx // (nx2 * ny)
        rem = idx % (nx2 * ny)
        b = rem // ny
        c = rem % ny
        y = ys[c]
        f1 = (x1s[a] - u10) / du1
        f2 = (x2s[b] - u20) / du2
        acc = 0.0
        for j in range(nt):
            r = y * tans[j]
            r1 = r / du1
            r2 = r / du2
            sub = 0.0
            for m in range(nn):
                sub += wnodes[m] * _lerp2(q, j, f1 + r1 * n1s[m], f2 + r2 * n2s[m], nu1, nu2)
            acc += wtheta[j] * sub
        if p != 0.0:
            acc *= y**p
        out[a, b, c] = acc * const
    return out


# ---------------------------------------------------------------------------
# back-projection, spatial parametrisation


@njit(cache=True, inline="always")
def _theta_lerp(q, row, theta, t0, dt, nt):
    pos = (theta - t0) / dt
    if pos < 0.0 or pos > nt - 1:
        return 0.0
    j = int(pos)
    if j > nt - 2:
        j = nt - 2
    a = pos - j
    return (1.0 - a) * q[row, j] + a * q[row, j + 1]


@njit(parallel=True, cache=True)
def backproject_spatial_2d(q, us, wu, t0, dt, xs, ys, p, const):
    nu = us.size
    nt = q.shape[1]
    nx = xs.size
    ny = ys.size
    tmax = t0 + dt * (nt - 1)
    out = np.zeros((nx, ny))
    for idx in prange(nx * ny):
        a = idx // ny
        c = idx % ny
        x = xs[a]
        y = ys[c]
        rmax = y * math.tan(tmax) * (1.0 + 1e-12)
        acc = 0.0
        for k in range(nu):
            r = abs(us[k] - x)
            if r > rmax:
                continue
            v = _theta_lerp(q, k, math.atan2(r, y), t0, dt, nt)
            if v == 0.0:
                continue
            w = wu[k]
            if p != 1.0:
                w *= (r * r + y * y) ** (0.5 * (p - 1.0))
            acc += w * v
        out[a, c] = acc * const
    return out


@njit(cache=True, inline="always")
def _quadrant(a, b):
    # integral of 1/|z| over [0, a] x [0, b]
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * math.asinh(b / a) + b * math.asinh(a / b)


@njit(cache=True, inline="always")
def _signed_quadrant(x, y):
    s = 1.0
    if x < 0.0:
        s = -s
    if y < 0.0:
        s = -s
    return s * _quadrant(abs(x), abs(y))


@njit(cache=True)
def inv_r_cell_integral(a1, b1, a2, b2):
    """Integral of 1/|z| over the rectangle [a1, b1] x [a2, b2]."""
    return (_signed_quadrant(b1, b2) - _signed_quadrant(a1, b2)
            - _signed_quadrant(b1, a2) + _signed_quadrant(a1, a2))


@njit(parallel=True, cache=True)
def backproject_spatial_3d(q, u1s, u2s, w1, w2, t0, dt, x1s, x2s, ys, p, const):
    nu1 = u1s.size
    nu2 = u2s.size
    nt = q.shape[2]
    du1 = u1s[1] - u1s[0]
    du2 = u2s[1] - u2s[0]
    near = max(du1, du2)
    tmax = t0 + dt * (nt - 1)
    nx1 = x1s.size
    nx2 = x2s.size
    ny = ys.size
    out = np.zeros((nx1, nx2, ny))
    for idx in prange(nx1 * nx2 * ny):
        a = idx // (nx2 * ny)
        rem = idx % (nx2 * ny)
        b = rem // ny
        c = rem % ny
        x1 = x1s[a]
        x2 = x2s[b]
        y = ys[c]
        rmax = y * math.tan(tmax) * (1.0 + 1e-12)
        acc = 0.0
        for i in range(nu1):
            e1 = u1s[i] - x1
            if abs(e1) > rmax:
                continue
            for k in range(nu2):
                e2 = u2s[k] - x2
                r = math.sqrt(e1 * e1 + e2 * e2)
                if r > rmax:
                    continue
                pos = (math.atan2(r, y) - t0) / dt
                if pos < 0.0 or pos > nt - 1:
                    continue
                j = int(pos)
                if j > nt - 2:
                    j = nt - 2
                al = pos - j
                v = (1.0 - al) * q[i, k, j] + al * q[i, k, j + 1]
                if v == 0.0:
                    continue
                if r < near:
                    # integrable 1/r singularity: integrate it exactly over the cell
                    w = inv_r_cell_integral(e1 - 0.5 * du1, e1 + 0.5 * du1, e2 - 0.5 * du2, e2 + 0.5 * du2)
                    w *= (w1[i] / du1) * (w2[k] / du2)
                else:
                    w = w1[i] * w2[k] / r
                if p != 1.0:
                    w *= (r * r + y * y) ** (0.5 * (p - 1.0))
                acc += w * v
        out[a, b, c] = acc * const
    return out
