"""Reference computations that share no code with the package.

The kernel here uses the expanded form (v.w)(D.D) - (v.D)(w.D) instead of
wedge products, curvature comes from closed forms or finite differences of
positions, and the quadrature is a plain dense trapezoid.
"""

import numpy as np


def ellipse_jet(a, b, s):
    s = np.asarray(s, dtype=float)
    x = np.stack([a * np.cos(s), b * np.sin(s)], axis=-1)
    v = np.stack([-a * np.sin(s), b * np.cos(s)], axis=-1)
    acc = np.stack([-a * np.cos(s), -b * np.sin(s)], axis=-1)
    return x, v, acc


def ellipse_kappa(a, b, s):
    return a * b / (a**2 * np.sin(s) ** 2 + b**2 * np.cos(s) ** 2) ** 1.5


def fd_kappa(position, s, h=1e-3):
    """Curvature from 4th-order central differences of positions only."""
    p = [position(s + k * h) for k in (-2, -1, 1, 2)]
    c = position(s)
    d1 = (p[0] - 8 * p[1] + 8 * p[2] - p[3]) / (12 * h)
    d2 = (-p[0] + 16 * p[1] - 30 * c + 16 * p[2] - p[3]) / (12 * h * h)
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    return np.abs(cross) / np.linalg.norm(d1, axis=-1) ** 3, np.linalg.norm(d1, axis=-1)


def expanded_kernel(x1, v1, x2, v2):
    D = x1 - x2
    dd = np.sum(D * D, axis=-1)
    vw = np.sum(v1 * v2, axis=-1)
    vd = np.sum(v1 * D, axis=-1)
    wd = np.sum(v2 * D, axis=-1)
    return -2.0 * (vw * dd - vd * wd) / dd**2


def dense_closed(jet, N):
    """Dense periodic trapezoid with the curvature diagonal |v|^2 kappa^2 / 2."""
    s = 2 * np.pi * np.arange(N) / N
    x, v, a = jet(s)
    total = 0.0
    for i0 in range(0, N, 256):
        sl = slice(i0, i0 + 256)
        with np.errstate(divide="ignore", invalid="ignore"):
            K = expanded_kernel(x[sl, None], v[sl, None], x[None], v[None])
        rows = np.arange(i0, min(i0 + 256, N))
        vv = np.sum(v[rows] ** 2, axis=-1)
        cross = v[rows, 0] * a[rows, 1] - v[rows, 1] * a[rows, 0]
        K[rows - i0, rows] = cross**2 / (2 * vv**2)
        total += K.sum()
    return total * (2 * np.pi / N) ** 2


def bump_jet(A, w, s):
    e = np.exp(-s * s / (w * w))
    x = np.stack([s, A * e], axis=-1)
    v = np.stack([np.ones_like(s), -2 * A * s / w**2 * e], axis=-1)
    acc = np.stack([np.zeros_like(s), A * e * (4 * s * s / w**4 - 2 / w**2)], axis=-1)
    return x, v, acc


def dense_open(jet, L, N):
    """Dense trapezoid over [-L, L]^2; zero-curvature ends make the corners harmless."""
    s = np.linspace(-L, L, N + 1)
    wt = np.ones(N + 1)
    wt[0] = wt[-1] = 0.5
    x, v, a = jet(s)
    total = 0.0
    for i0 in range(0, N + 1, 256):
        rows = np.arange(i0, min(i0 + 256, N + 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            K = expanded_kernel(x[rows, None], v[rows, None], x[None], v[None])
        vv = np.sum(v[rows] ** 2, axis=-1)
        cross = v[rows, 0] * a[rows, 1] - v[rows, 1] * a[rows, 0]
        K[rows - i0, rows] = cross**2 / (2 * vv**2)
        total += np.sum(K * wt[None, :] * wt[rows, None])
    return total * (2 * L / N) ** 2
