"""Transverse-tangent kernel and the curve number n.

For two curve points with velocities v, w and chord D = x(s) - x(u) the
kernel is

    K(s, u) = c * [(v ^ D) . (w ^ D)] / (D . D)^2

where ``^`` is the wedge product and the dots use the metric diag(g).  The
Euclidean curve number uses c = -2 and g = (1, ..., 1); on the diagonal K
tends to |v|^2 kappa^2 / 2.  The wedge form keeps full relative precision as
the two points merge, unlike the expanded (v.w)(D.D) - (v.D)(w.D).
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .curves import TWO_PI, CurveError, CurveSpec, validate
from .grid import Samples, nested_sum, pairwise_sum

log = logging.getLogger(__name__)

SWITCH_FRACTION = 1e-4
MIN_GRID = 64
MAX_GRID = 4096
TOL_CLOSED = 1e-8
TOL_OPEN = 1e-6
# truncated tails of an asymptotically straight curve fall off like L^-3
TAIL_ORDER = 3
# values this small are zero for convergence purposes (straight lines)
ATOL = 1e-14


class SingularKernelError(CurveError):
    """Two well-separated curve points coincide (self-intersection)."""


class ValidationError(CurveError):
    def __init__(self, report):
        super().__init__(f"curve failed validation: {report.summary()}")
        self.report = report


@dataclass(frozen=True)
class TruncationPolicy:
    start: float = 8.0
    max: float = 128.0
    factor: float = 2.0

    def windows(self):
        L = self.start
        while L <= self.max * (1 + 1e-12):
            yield L
            L *= self.factor


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    grid_size: int
    converged: bool
    trace: list = field(default_factory=list)
    window: float | None = None
    tail_estimate: float | None = None
    window_trace: list = field(default_factory=list)

    @property
    def n(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        out = {
            "n": self.value,
            "error_estimate": self.error_estimate,
            "grid_size": self.grid_size,
            "converged": self.converged,
            "trace": [[int(g), float(v)] for g, v in self.trace],
        }
        if self.window is not None:
            out["window"] = self.window
            out["tail_estimate"] = self.tail_estimate
            out["window_trace"] = [[float(L), float(v)] for L, v in self.window_trace]
        return out


@dataclass(frozen=True)
class TransverseKernel:
    """c * (v ^ D).(w ^ D) / (D.D)^2 under the diagonal metric ``metric``."""

    prefactor: float
    metric: tuple

    def _pairs(self):
        g = self.metric
        return [(i, j, g[i] * g[j]) for i in range(len(g)) for j in range(i + 1, len(g))]

    def dot(self, p, q):
        return sum(gi * p[..., i] * q[..., i] for i, gi in enumerate(self.metric))

    def wedge_dot(self, p, q, r, t):
        """(p ^ q) . (r ^ t) for broadcastable (..., d) arrays."""
        total = 0.0
        for i, j, sign in self._pairs():
            total = total + sign * (p[..., i] * q[..., j] - p[..., j] * q[..., i]) * (
                r[..., i] * t[..., j] - r[..., j] * t[..., i])
        return total

    def diagonal(self, v, a):
        """Limit of the kernel as the two parameters merge."""
        vv = self.dot(v, v)
        return -self.prefactor * self.wedge_dot(a, v, a, v) / (4.0 * vv * vv)

    def offdiagonal(self, x1, v1, x2, v2):
        D = x1 - x2
        dd = self.dot(D, D)
        return self.prefactor * self.wedge_dot(v1, D, v2, D), dd

    def block(self, near):
        """Grid-block evaluator; ``near(p_rows, p_cols)`` flags diagonal cells."""

        def evaluate(rows: Samples, cols: Samples):
            num, dd = self.offdiagonal(rows.x[:, None, :], rows.v[:, None, :],
                                       cols.x[None, :, :], cols.v[None, :, :])
            mask = near(rows.param[:, None], cols.param[None, :])
            bad = (~mask) & ~(np.abs(dd) > 0)
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                raise SingularKernelError(
                    f"chord vanishes at distinct parameters {rows.param[i]:.6g}, {cols.param[j]:.6g}")
            dd = np.where(mask, 1.0, dd)
            K = num / (dd * dd)
            if np.any(mask):
                diag = np.broadcast_to(self.diagonal(rows.v, rows.a)[:, None], K.shape)
                K = np.where(mask, diag, K)
            if not np.all(np.isfinite(K)):
                raise SingularKernelError("kernel is not finite on the grid")
            return K

        return evaluate


EUCLIDEAN_2D = TransverseKernel(-2.0, (1.0, 1.0))
EUCLIDEAN_3D = TransverseKernel(-2.0, (1.0, 1.0, 1.0))


def euclidean(dim: int) -> TransverseKernel:
    return EUCLIDEAN_2D if dim == 2 else EUCLIDEAN_3D


def _closed_near(switch):
    def near(p, q):
        d = np.abs(p - q) % TWO_PI
        return np.minimum(d, TWO_PI - d) < switch
    return near


def _open_near(switch):
    def near(p, q):
        return np.abs(p - q) < switch
    return near


def kernel(curve: CurveSpec, s, u, switch: float | None = None):
    """K(s, u) for the Euclidean curve number; broadcasts over s and u.

    Parameter pairs closer than ``switch`` (default 1e-4 of the period, or
    of unit parameter length for open curves) return the diagonal limit at
    their midpoint.
    """
    s, u = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(u, dtype=float))
    shape = s.shape
    s, u = s.ravel(), u.ravel()
    if switch is None:
        switch = SWITCH_FRACTION * (TWO_PI if curve.closed else 1.0)
    kern = euclidean(curve.dim)
    if curve.closed:
        d = np.mod(s - u + np.pi, TWO_PI) - np.pi
    else:
        d = s - u
    near = np.abs(d) < switch
    x1, v1, _ = curve.eval(s)
    x2, v2, _ = curve.eval(u)
    num, dd = kern.offdiagonal(x1, v1, x2, v2)
    if np.any(~near & ~(dd > 0)):
        raise SingularKernelError("chord vanishes at distinct parameters")
    with np.errstate(divide="ignore", invalid="ignore"):
        K = num / (dd * dd)
    if np.any(near):
        _, vm, am = curve.eval(u[near] + d[near] / 2)
        K[near] = kern.diagonal(vm, am)
    return K.reshape(shape) if shape else float(K[0])


# -- drivers ---------------------------------------------------------------


def _converged(new, old, tol):
    change = abs(new - old)
    return change <= tol * abs(new) or change <= ATOL


def closed_quadrature(sampler, kern: TransverseKernel, tol: float, max_grid: int = MAX_GRID,
                      min_grid: int = MIN_GRID) -> QuadratureResult:
    """Product periodic trapezoid on [0, 2pi)^2 with nested grid doubling."""
    block = kern.block(_closed_near(SWITCH_FRACTION * TWO_PI))
    N, total, trace = min_grid, None, []
    value = prev = None
    while True:
        s = TWO_PI * np.arange(N) / N
        x, v, a = sampler(s)
        total = nested_sum(block, total, Samples(s, x, v, a, np.ones(N)))
        value = total * (TWO_PI / N) ** 2
        trace.append((N, value))
        if prev is not None and _converged(value, prev, tol):
            return QuadratureResult(value, abs(value - prev), N, True, trace)
        if 2 * N > max_grid:
            err = abs(value - prev) if prev is not None else np.inf
            log.warning("closed quadrature not converged at grid %d (change %.3g)", N, err)
            return QuadratureResult(value, err, N, False, trace)
        prev, N = value, 2 * N


def closed_value_at(curve: CurveSpec, N: int) -> float:
    """Periodic trapezoid value of n on one fixed N x N grid, no refinement."""
    block = euclidean(curve.dim).block(_closed_near(SWITCH_FRACTION * TWO_PI))
    s = TWO_PI * np.arange(N) / N
    x, v, a = curve.eval(s)
    return nested_sum(block, None, Samples(s, x, v, a, np.ones(N))) * (TWO_PI / N) ** 2


def _window_value(sampler, block, lo, hi, N, tol, max_grid):
    """Trapezoid value on [lo, hi]^2, doubling the interval count from N."""
    total, prev, trace = None, None, []
    while True:
        s = np.linspace(lo, hi, N + 1)
        x, v, a = sampler(s)
        w = np.ones(N + 1)
        w[0] = w[-1] = 0.5
        total = nested_sum(block, total, Samples(s, x, v, a, w))
        value = total * ((hi - lo) / N) ** 2
        trace.append((N, value))
        if prev is not None and _converged(value, prev, tol):
            return value, abs(value - prev), N, True, trace
        if 2 * N > max_grid:
            err = abs(value - prev) if prev is not None else np.inf
            return value, err, N, False, trace
        prev, N = value, 2 * N


def open_quadrature(sampler, kern: TransverseKernel, window, tol: float,
                    policy: TruncationPolicy | None = None, max_grid: int = MAX_GRID,
                    min_grid: int = MIN_GRID) -> QuadratureResult:
    """Truncated trapezoid quadrature over growing windows.

    ``window(L)`` gives the parameter interval for window size L.  The
    truncation tail is modelled as C / L^3; successive windows give the
    tail estimate, and convergence is judged on the tail-corrected values.
    """
    policy = policy or TruncationPolicy()
    ratio = policy.factor**TAIL_ORDER - 1.0
    raws, estimates, window_trace = [], [], []
    N = min_grid
    grid_ok = True
    last = None
    prev_len = None
    for L in policy.windows():
        lo, hi = window(L)
        if prev_len is not None:
            # restart one level coarser than the previous spacing
            N = int(np.clip(2 ** round(np.log2(N * (hi - lo) / prev_len / 2)), min_grid, max_grid // 2))
        prev_len = hi - lo
        block = kern.block(_open_near(SWITCH_FRACTION * (hi - lo)))
        value, gerr, N_used, ok, trace = _window_value(sampler, block, lo, hi, N, tol, max_grid)
        grid_ok = ok
        raws.append(value)
        window_trace.append((L, value))
        tail = (raws[-1] - raws[-2]) / ratio if len(raws) > 1 else 0.0
        estimates.append(value + tail)
        last = (L, N_used, trace, gerr, tail)
        N = N_used
        if len(estimates) >= 3:
            change = abs(estimates[-1] - estimates[-2])
            steps = np.abs(np.diff(raws))
            shrinking = steps[-1] <= steps[-2] or steps[-1] <= ATOL
            if change <= tol * abs(estimates[-1]) or change <= ATOL:
                return QuadratureResult(estimates[-1], change + gerr, N_used, bool(grid_ok and shrinking),
                                        trace, L, tail, window_trace)
    L, N_used, trace, gerr, tail = last
    change = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else np.inf
    log.warning("open quadrature not converged at window %.3g (change %.3g)", L, change)
    return QuadratureResult(estimates[-1], change + gerr, N_used, False, trace, L, tail, window_trace)


def _require_valid(curve):
    report = validate(curve)
    if not report.ok:
        raise ValidationError(report)
    return report


def curve_number_closed(curve: CurveSpec, tol: float = TOL_CLOSED, max_grid: int = MAX_GRID,
                        check: bool = True) -> QuadratureResult:
    """Curve number n of a closed curve."""
    if not curve.closed:
        raise CurveError("curve_number_closed needs a closed curve")
    if check:
        _require_valid(curve)
    return closed_quadrature(curve.eval, euclidean(curve.dim), tol, max_grid)


def curve_number_open(curve: CurveSpec, tol: float = TOL_OPEN,
                      window_policy: TruncationPolicy | None = None,
                      max_grid: int = MAX_GRID, check: bool = True) -> QuadratureResult:
    """Curve number n of an open, asymptotically straight curve."""
    if curve.closed:
        raise CurveError("curve_number_open needs an open curve")
    if check:
        _require_valid(curve)
    return open_quadrature(curve.eval, euclidean(curve.dim), curve.window, tol,
                           window_policy, max_grid)


def curve_number(curve: CurveSpec, tol: float | None = None, **kw) -> QuadratureResult:
    if curve.closed:
        return curve_number_closed(curve, TOL_CLOSED if tol is None else tol, **kw)
    return curve_number_open(curve, TOL_OPEN if tol is None else tol, **kw)


def kernel_grid_csv(curve: CurveSpec, N: int = 128, L: float = 8.0) -> str:
    """Kernel values on an N x N grid as CSV with columns s,u,K."""
    if curve.closed:
        s = TWO_PI * np.arange(N) / N
    else:
        lo, hi = curve.window(L)
        s = np.linspace(lo, hi, N)
    S, U = np.meshgrid(s, s, indexing="ij")
    K = kernel(curve, S, U)
    buf = io.StringIO()
    buf.write("s,u,K\n")
    for si, ui, ki in zip(S.ravel(), U.ravel(), K.ravel()):
        buf.write(f"{float(si)!r},{float(ui)!r},{float(ki)!r}\n")
    return buf.getvalue()


__all__ = [
    "QuadratureResult", "TruncationPolicy", "TransverseKernel", "SingularKernelError",
    "ValidationError", "kernel", "curve_number_closed", "curve_number_open", "curve_number",
    "kernel_grid_csv", "closed_quadrature", "closed_value_at", "open_quadrature", "pairwise_sum",
]
