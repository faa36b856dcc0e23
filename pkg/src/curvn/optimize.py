"""Descent on Fourier loops toward the smallest curve number.

The search space is the coefficient vector of a plane ``FourierLoop`` with
its centroid pinned at the origin.  Scale is removed by renormalizing
|a_1|^2 + |b_1|^2 after every step; the remaining flat directions (planar
rotation and parameter shift) are left free.

Near the circle the Hessian of n grows like k^3 along harmonic k, so plain
gradient steps stall on the high harmonics.  The descent direction is the
gradient scaled by 1/k^3 per harmonic, a fixed diagonal preconditioner.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveError, FourierLoop, validate
from .kernel import SingularKernelError, closed_value_at, curve_number_closed

log = logging.getLogger(__name__)

PENALTY = 1e6
CIRCLE_N = 2.0 * np.pi**2
VIOLATION_MARGIN = 1e-3


@dataclass(frozen=True)
class ObjectiveValue:
    n: float
    penalized: bool
    grid_size: int = 0
    reason: str = ""


def objective_value(loop: FourierLoop, tol: float = 1e-6) -> ObjectiveValue:
    """n of ``loop``, or the penalty when the loop fails validation."""
    try:
        report = validate(loop)
    except CurveError as exc:
        return ObjectiveValue(PENALTY, True, reason=str(exc))
    if not report.ok:
        return ObjectiveValue(PENALTY, True, reason=report.summary())
    try:
        res = curve_number_closed(loop, tol, check=False)
    except SingularKernelError as exc:
        return ObjectiveValue(PENALTY, True, reason=str(exc))
    return ObjectiveValue(res.value, False, res.grid_size)


def objective(loop: FourierLoop, tol: float = 1e-6) -> float:
    return objective_value(loop, tol).n


def gradient(loop: FourierLoop, h: float = 1e-4, grid: int | None = None) -> np.ndarray:
    """Central differences of n per coefficient, on one fixed quadrature grid.

    The grid defaults to the one that reaches tolerance 1e-8 at ``loop``;
    holding it fixed keeps the probes free of refinement jumps.
    """
    if grid is None:
        base = objective_value(loop, 1e-8)
        if base.penalized:
            raise CurveError(f"gradient requested in the penalty region: {base.reason}")
        grid = base.grid_size
    c = loop.coefficients()
    g = np.empty_like(c)
    for i in range(c.size):
        e = np.zeros_like(c)
        e[i] = h
        try:
            fp = closed_value_at(loop.with_coefficients(c + e), grid)
            fm = closed_value_at(loop.with_coefficients(c - e), grid)
        except SingularKernelError as exc:
            raise CurveError(f"penalty region met while probing coefficient {i}") from exc
        g[i] = (fp - fm) / (2.0 * h)
    return g


def _first_harmonic_norm(flat, shape):
    half = flat.size // 2
    a1 = flat[:half].reshape(shape)[0]
    b1 = flat[half:].reshape(shape)[0]
    return float(np.sqrt(a1 @ a1 + b1 @ b1))


def _preconditioner(shape):
    k = np.arange(1, shape[0] + 1, dtype=float)
    per = np.repeat(k**-3, shape[1])
    return np.concatenate([per, per])


def _normalized(flat, shape, target):
    return flat * (target / _first_harmonic_norm(flat, shape))


@dataclass
class MinimizeOptions:
    harmonics: int = 8
    gtol: float = 1e-4
    # stop when the relative decrease over ``stall_window`` accepted steps falls below ftol
    ftol: float = 1e-10
    stall_window: int = 5
    max_iter: int = 200
    h: float = 1e-4
    tol: float = 1e-8
    armijo: float = 1e-4
    max_backtracks: int = 40
    initial_step: float = 1e-2


@dataclass
class TraceStep:
    iteration: int
    coefficients: np.ndarray
    n: float
    gradient_norm: float


@dataclass
class OptimizationTrace:
    steps: list[TraceStep] = field(default_factory=list)
    reason: str = ""
    flagged: bool = False
    conjecture_violation: bool = False

    @property
    def values(self) -> np.ndarray:
        return np.array([s.n for s in self.steps])

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) < 0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,n,gradient_norm\n")
        for s in self.steps:
            buf.write(f"{s.iteration},{float(s.n)!r},{float(s.gradient_norm)!r}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"reason": self.reason, "flagged": self.flagged,
                "conjecture_violation": self.conjecture_violation,
                "iterations": [{"iteration": s.iteration, "n": s.n,
                                "gradient_norm": s.gradient_norm} for s in self.steps]}


def pad_harmonics(loop: FourierLoop, M: int) -> FourierLoop:
    """Same curve with zero coefficients appended up to M harmonics, centroid at the origin."""
    if loop.dim != 2:
        raise CurveError("the optimizer works on plane loops")
    k = loop.harmonics
    if k > M:
        raise CurveError(f"loop has {k} harmonics, more than the requested {M}")
    a = np.vstack([loop.a, np.zeros((M - k, 2))])
    b = np.vstack([loop.b, np.zeros((M - k, 2))])
    return FourierLoop(a, b)


def _fixed_value(loop, grid):
    """n on a fixed grid, or the penalty outside the valid region."""
    try:
        if not validate(loop).ok:
            return PENALTY, True
        return closed_value_at(loop, grid), False
    except CurveError:
        return PENALTY, True


def minimize(initial: FourierLoop, options: MinimizeOptions | None = None):
    """Preconditioned gradient descent with Armijo backtracking.

    All values in one run come from a single fixed quadrature grid, chosen
    at the start with tolerance ``options.tol`` and doubled whenever an
    accepted loop needs it, so the line search compares like with like.
    Returns the best loop and its trace.
    """
    opts = options or MinimizeOptions()
    loop = pad_harmonics(initial, max(opts.harmonics, initial.harmonics))
    shape = loop.a.shape
    target = _first_harmonic_norm(loop.coefficients(), shape)
    if target == 0:
        raise CurveError("first harmonic vanishes; cannot fix the scale")
    x = loop.coefficients()
    base = objective_value(loop, opts.tol)
    if base.penalized:
        raise CurveError(f"initial loop fails validation: {base.reason}")
    grid = base.grid_size
    f = closed_value_at(loop, grid)
    trace = OptimizationTrace()
    step = opts.initial_step
    P = _preconditioner(shape)
    prev = None
    for it in range(opts.max_iter + 1):
        g = gradient(loop, opts.h, grid)
        gnorm = float(np.linalg.norm(g))
        trace.steps.append(TraceStep(it, x.copy(), f, gnorm))
        log.debug("iteration %d: n = %.15g, |g| = %.3g, grid %d", it, f, gnorm, grid)
        if gnorm < opts.gtol:
            trace.reason = "gradient norm below gtol"
            break
        if it >= opts.stall_window:
            old = trace.steps[-1 - opts.stall_window].n
            if old - f <= opts.ftol * abs(f):
                trace.reason = "objective decrease stalled below ftol"
                break
        if it == opts.max_iter:
            trace.reason = "maximum iterations reached"
            trace.flagged = True
            break
        d = -P * g
        slope = float(g @ d)
        if prev is not None:
            # Barzilai-Borwein initial step in the preconditioned metric
            dx, dg = x - prev[0], g - prev[1]
            curv = float(dx @ dg)
            if curv > 0:
                step = float(dx @ (dx / P)) / curv
        accepted = None
        t = step
        for _ in range(opts.max_backtracks):
            trial_x = _normalized(x + t * d, shape, target)
            trial = loop.with_coefficients(trial_x)
            val, penalized = _fixed_value(trial, grid)
            if not penalized and val <= f + opts.armijo * t * slope and val < f:
                accepted = (trial_x, trial, val)
                break
            t *= 0.5
        if accepted is None:
            trace.reason = "line search rejected every step"
            trace.flagged = True
            break
        prev = (x, g)
        x, loop, f = accepted
        finer = closed_value_at(loop, 2 * grid)
        if abs(finer - f) > opts.tol * abs(finer):
            grid, f = 2 * grid, finer
    if f < CIRCLE_N - VIOLATION_MARGIN:
        trace.conjecture_violation = True
        trace.flagged = True
        log.error("CONJECTURE VIOLATION: n = %.12g is below 2 pi^2 = %.12g; keep this loop "
                  "for manual study: %s", f, CIRCLE_N, loop.to_dict())
    return loop, trace


__all__ = ["PENALTY", "ObjectiveValue", "objective", "objective_value", "gradient",
           "MinimizeOptions", "OptimizationTrace", "TraceStep", "minimize", "pad_harmonics"]
