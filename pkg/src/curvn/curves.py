"""Smooth curves in the plane and in 3-space.

Every curve evaluates vectorized: ``curve.eval(s)`` returns position,
velocity and acceleration arrays of shape ``(n, d)``.  Closed curves have
period 2*pi; open curves run over the real line (or an open interval for
images of inversions) and must leave along the same direction they came in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import cdist

TWO_PI = 2.0 * np.pi

# validation constants
EPS_DIR = 1e-6
PROXIMITY_FLOOR = 1e-3
SIMPLENESS_SAMPLES = 2048


class CurveError(ValueError):
    """Raised for invalid curve parameters or evaluation requests."""


class CurveSample(NamedTuple):
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


def _vec(values, name="vector"):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size not in (2, 3):
        raise CurveError(f"{name} must have 2 or 3 components, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise CurveError(f"{name} must be finite")
    return arr


def _params(s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(s)):
        raise CurveError("curve parameter must be finite")
    return s


class CurveSpec:
    """Base class of all curve kinds."""

    kind: str = ""
    closed: bool = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def period(self) -> float:
        return TWO_PI

    @property
    def domain(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def eval(self, s):
        s = _params(s)
        if self.closed:
            s = np.mod(s, TWO_PI)
        else:
            lo, hi = self.domain
            if np.any(s <= lo) or np.any(s >= hi):
                raise CurveError(f"parameter outside open domain ({lo}, {hi})")
        return self._eval(s)

    def _eval(self, s):
        raise NotImplementedError

    # open curves
    def window(self, L: float) -> tuple[float, float]:
        """Truncated parameter interval for the window size ``L``."""
        return (-L, L)

    def far_parameters(self) -> tuple[float, float]:
        """Parameters deep in the two straight ends (open curves)."""
        return (-1e4, 1e4)

    def asymptote(self):
        """The common asymptotic line ``(point, direction)`` of an open curve."""
        raise CurveError(f"{self.kind} curve does not expose an asymptotic line")

    def sample_parameters(self, n: int) -> np.ndarray:
        if self.closed:
            return TWO_PI * np.arange(n) / n
        lo, hi = self.window(8.0)
        return np.linspace(lo, hi, n)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Circle(CurveSpec):
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    radius: float = 1.0
    kind = "circle"
    closed = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if not self.radius > 0:
            raise CurveError("radius must be positive")

    @property
    def dim(self):
        return self.center.size

    def _eval(self, s):
        c, sn = np.cos(s), np.sin(s)
        r = self.radius
        x = np.zeros((s.size, self.dim))
        v = np.zeros_like(x)
        a = np.zeros_like(x)
        x[:, 0], x[:, 1] = r * c, r * sn
        v[:, 0], v[:, 1] = -r * sn, r * c
        a[:, 0], a[:, 1] = -r * c, -r * sn
        return x + self.center, v, a

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Ellipse(CurveSpec):
    """Ellipse with semi-major axis ``a`` along the rotated x-axis."""

    a: float = 1.0
    ecc: float = 0.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    angle: float = 0.0
    kind = "ellipse"
    closed = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if self.center.size != 2:
            raise CurveError("ellipse is a plane curve")
        if not self.a > 0:
            raise CurveError("a must be positive")
        if not 0 <= self.ecc < 1:
            raise CurveError("ecc must lie in [0, 1)")

    @property
    def dim(self):
        return 2

    @property
    def b(self) -> float:
        return self.a * np.sqrt(1.0 - self.ecc**2)

    def _eval(self, s):
        c, sn = np.cos(s), np.sin(s)
        a, b = self.a, self.b
        x = np.stack([a * c, b * sn], axis=-1)
        v = np.stack([-a * sn, b * c], axis=-1)
        acc = -x.copy()
        if self.angle:
            rot = _rotation2(self.angle)
            x, v, acc = x @ rot.T, v @ rot.T, acc @ rot.T
        return x + self.center, v, acc

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "ecc": self.ecc,
                "center": self.center.tolist(), "angle": self.angle}


@dataclass(frozen=True, eq=False)
class Line(CurveSpec):
    point: np.ndarray = field(default_factory=lambda: np.zeros(2))
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    kind = "line"
    closed = False

    def __post_init__(self):
        object.__setattr__(self, "point", _vec(self.point, "point"))
        object.__setattr__(self, "direction", _vec(self.direction, "direction"))
        if self.point.size != self.direction.size:
            raise CurveError("point and direction dimensions differ")
        if not np.linalg.norm(self.direction) > 0:
            raise CurveError("direction must be nonzero")

    @property
    def dim(self):
        return self.point.size

    def _eval(self, s):
        x = self.point + s[:, None] * self.direction
        v = np.broadcast_to(self.direction, x.shape).copy()
        return x, v, np.zeros_like(x)

    def asymptote(self):
        return self.point, self.direction

    def to_dict(self):
        return {"kind": self.kind, "point": self.point.tolist(),
                "direction": self.direction.tolist()}


@dataclass(frozen=True, eq=False)
class FourierLoop(CurveSpec):
    """x(s) = center + sum_k a_k cos(ks) + b_k sin(ks), k = 1..M."""

    a: np.ndarray = field(default_factory=lambda: np.array([[1.0, 0.0]]))
    b: np.ndarray = field(default_factory=lambda: np.array([[0.0, 1.0]]))
    center: np.ndarray | None = None
    kind = "fourier-loop"
    closed = True

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.shape[1] not in (2, 3) or a.shape[0] < 1:
            raise CurveError("fourier-loop needs matching (M, d) coefficient arrays, M >= 1")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise CurveError("fourier-loop coefficients must be finite")
        center = np.zeros(a.shape[1]) if self.center is None else _vec(self.center, "center")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "center", center)

    @property
    def dim(self):
        return self.a.shape[1]

    @property
    def harmonics(self) -> int:
        return self.a.shape[0]

    def _eval(self, s):
        k = np.arange(1, self.harmonics + 1)
        ks = np.outer(s, k)
        c, sn = np.cos(ks), np.sin(ks)
        x = c @ self.a + sn @ self.b + self.center
        v = (-sn * k) @ self.a + (c * k) @ self.b
        acc = (-c * k**2) @ self.a + (-sn * k**2) @ self.b
        return x, v, acc

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.a.ravel(), self.b.ravel()])

    def with_coefficients(self, flat) -> "FourierLoop":
        flat = np.asarray(flat, dtype=float)
        half = flat.size // 2
        shape = self.a.shape
        return FourierLoop(flat[:half].reshape(shape), flat[half:].reshape(shape), self.center)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a.tolist(), "b": self.b.tolist(),
                "center": self.center.tolist()}


@dataclass(frozen=True, eq=False)
class OpenBump(CurveSpec):
    """x(s) = (s, A exp(-s^2 / w^2))."""

    amplitude: float = 1.0
    width: float = 1.0
    kind = "open-bump"
    closed = False

    def __post_init__(self):
        if not self.width > 0:
            raise CurveError("width must be positive")
        if not np.isfinite(self.amplitude):
            raise CurveError("amplitude must be finite")

    @property
    def dim(self):
        return 2

    def _eval(self, s):
        w2 = self.width**2
        g = self.amplitude * np.exp(-s * s / w2)
        dg = -2.0 * s / w2 * g
        ddg = (4.0 * s * s / w2**2 - 2.0 / w2) * g
        x = np.stack([s, g], axis=-1)
        v = np.stack([np.ones_like(s), dg], axis=-1)
        acc = np.stack([np.zeros_like(s), ddg], axis=-1)
        return x, v, acc

    def far_parameters(self):
        far = 100.0 * self.width
        return (-far, far)

    def asymptote(self):
        return np.zeros(2), np.array([1.0, 0.0])

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "width": self.width}


@dataclass(frozen=True, eq=False)
class Spline(CurveSpec):
    """C2 cubic spline through ``points``.

    Closed splines are periodic with the chord-length parameter rescaled to
    [0, 2*pi).  Open splines use natural end conditions and chord length
    as parameter, and continue as straight lines past the end points.
    """

    points: np.ndarray = None
    is_closed: bool = True
    kind = "spline"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise CurveError("spline points must be an (n, 2) or (n, 3) array")
        if pts.shape[0] < 4:
            raise CurveError(f"spline needs at least 4 points, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise CurveError("spline points must be finite")
        nodes = np.vstack([pts, pts[:1]]) if self.is_closed else pts
        chords = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
        if np.any(chords == 0):
            raise CurveError("spline points contain duplicate consecutive points")
        t = np.concatenate([[0.0], np.cumsum(chords)])
        if self.is_closed:
            t = t * (TWO_PI / t[-1])
            t[-1] = TWO_PI
            spline = CubicSpline(t, nodes, bc_type="periodic")
        else:
            spline = CubicSpline(t, nodes, bc_type="natural")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_knots", t)
        object.__setattr__(self, "_spline", spline)

    @property
    def closed(self):
        return self.is_closed

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def knots(self) -> np.ndarray:
        """Parameter values at the interpolated points (closed: plus 2*pi)."""
        return self._knots.copy()

    def _eval(self, s):
        sp = self._spline
        if self.is_closed:
            return sp(s), sp(s, 1), sp(s, 2)
        end = self._knots[-1]
        inner = np.clip(s, 0.0, end)
        x, v, a = sp(inner), sp(inner, 1), sp(inner, 2)
        outside = (s < 0.0) | (s > end)
        if np.any(outside):
            # natural end conditions make the linear continuation C2
            x[outside] += v[outside] * (s - inner)[outside, None]
            a[outside] = 0.0
        return x, v, a

    def window(self, L):
        return (-L, self._knots[-1] + L)

    def far_parameters(self):
        end = self._knots[-1]
        return (-10.0 * end - 1.0, 11.0 * end + 1.0)

    def sample_parameters(self, n):
        if self.is_closed:
            return super().sample_parameters(n)
        return np.linspace(0.0, self._knots[-1], n)

    def seam_jump(self) -> float:
        """Largest mismatch of x, x', x'' across the periodic seam."""
        sp, end = self._spline, self._knots[-1]
        return max(float(np.max(np.abs(sp(0.0, k) - sp(end, k)))) for k in range(3))

    def to_dict(self):
        return {"kind": self.kind, "points": self.points.tolist(), "closed": self.is_closed}


def fit_spline(points, closed: bool = True) -> Spline:
    """Interpolate ``points`` by a C2 cubic spline (periodic when closed)."""
    return Spline(np.asarray(points, dtype=float), closed)


# -- derived curves ---------------------------------------------------------


def _rotation2(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class Similarity(CurveSpec):
    """x -> scale * R x + shift applied to a base curve."""

    base: CurveSpec = None
    rotation: np.ndarray = None
    scale: float = 1.0
    shift: np.ndarray = None
    kind = "similarity"

    def __post_init__(self):
        d = self.base.dim
        rot = np.eye(d) if self.rotation is None else np.asarray(self.rotation, dtype=float)
        if rot.shape != (d, d) or not np.allclose(rot @ rot.T, np.eye(d), atol=1e-12):
            raise CurveError("rotation must be an orthogonal matrix of the curve dimension")
        if not self.scale > 0:
            raise CurveError("scale must be positive")
        shift = np.zeros(d) if self.shift is None else np.asarray(self.shift, dtype=float)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "shift", shift)

    @property
    def closed(self):
        return self.base.closed

    @property
    def dim(self):
        return self.base.dim

    @property
    def domain(self):
        return self.base.domain

    def eval(self, s):
        x, v, a = self.base.eval(s)
        m = self.scale * self.rotation.T
        return x @ m + self.shift, v @ m, a @ m

    def window(self, L):
        return self.base.window(L)

    def far_parameters(self):
        return self.base.far_parameters()

    def sample_parameters(self, n):
        return self.base.sample_parameters(n)

    def asymptote(self):
        p, d = self.base.asymptote()
        m = self.scale * self.rotation
        return m @ p + self.shift, m @ d

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(),
                "rotation": self.rotation.tolist(), "scale": self.scale,
                "shift": self.shift.tolist()}


@dataclass(frozen=True, eq=False)
class Reparameterized(CurveSpec):
    """Base curve evaluated at phi(s) = sign * s + amplitude * sin(harmonic * s)."""

    base: CurveSpec = None
    sign: int = 1
    amplitude: float = 0.0
    harmonic: int = 1
    kind = "reparameterized"

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise CurveError("sign must be +1 or -1")
        if abs(self.amplitude) * self.harmonic >= 1:
            raise CurveError("reparameterization must be monotone: |amplitude| * harmonic < 1")
        if self.base.closed and int(self.harmonic) != self.harmonic:
            raise CurveError("closed curves need an integer harmonic")

    @property
    def closed(self):
        return self.base.closed

    @property
    def dim(self):
        return self.base.dim

    @property
    def domain(self):
        lo, hi = self.base.domain
        return (lo, hi) if self.sign > 0 else (-hi, -lo)

    def _phi(self, s):
        k, amp = self.harmonic, self.amplitude
        phi = self.sign * s + amp * np.sin(k * s)
        dphi = self.sign + amp * k * np.cos(k * s)
        ddphi = -amp * k * k * np.sin(k * s)
        return phi, dphi, ddphi

    def eval(self, s):
        s = _params(s)
        if self.closed:
            s = np.mod(s, TWO_PI)
        phi, dphi, ddphi = self._phi(s)
        x, v, a = self.base.eval(phi)
        return x, v * dphi[:, None], a * (dphi**2)[:, None] + v * ddphi[:, None]

    def window(self, L):
        lo, hi = self.base.window(L)
        return (lo, hi) if self.sign > 0 else (-hi, -lo)

    def far_parameters(self):
        lo, hi = self.base.far_parameters()
        return (lo, hi) if self.sign > 0 else (-hi, -lo)

    def sample_parameters(self, n):
        if self.closed:
            return super().sample_parameters(n)
        lo, hi = self.window(8.0)
        return np.linspace(lo, hi, n)

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "sign": self.sign,
                "amplitude": self.amplitude, "harmonic": self.harmonic}


def translate(curve, shift):
    return Similarity(curve, shift=np.asarray(shift, dtype=float))


def rotate(curve, rotation):
    """Rotate by an angle (plane curves) or an orthogonal matrix."""
    rot = np.asarray(rotation, dtype=float)
    if rot.ndim == 0:
        rot = _rotation2(float(rot))
    return Similarity(curve, rotation=rot)


def scale(curve, factor):
    return Similarity(curve, scale=float(factor))


def reverse(curve):
    return Reparameterized(curve, sign=-1)


def reparameterize(curve, amplitude, harmonic=1):
    return Reparameterized(curve, amplitude=amplitude, harmonic=harmonic)


# -- point operations -------------------------------------------------------


def evaluate(curve: CurveSpec, s: float) -> CurveSample:
    """Position, velocity and acceleration at a single parameter."""
    if not np.isfinite(s):
        raise CurveError("curve parameter must be finite")
    x, v, a = curve.eval(np.array([float(s)]))
    return CurveSample(x[0], v[0], a[0])


def wedge_sq(a, b):
    """|a ^ b|^2 summed over coordinate planes, for (..., d) arrays."""
    d = a.shape[-1]
    total = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            total = total + (a[..., i] * b[..., j] - a[..., j] * b[..., i]) ** 2
    return total


def curvature(curve: CurveSpec, s) -> np.ndarray | float:
    """Unsigned curvature |x' ^ x''| / |x'|^3."""
    scalar = np.ndim(s) == 0
    x, v, a = curve.eval(s)
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed == 0):
        raise CurveError("curvature undefined at zero velocity")
    kappa = np.sqrt(wedge_sq(v, a)) / speed**3
    return float(kappa[0]) if scalar else kappa


# -- validation -------------------------------------------------------------


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        return "; ".join(f"{c.name}: {'ok' if c.passed else 'FAIL'} ({c.detail})" for c in self.checks)


def diameter(x) -> float:
    return float(np.max(cdist(x, x)))


def _min_separated_distance(curve, n):
    s = curve.sample_parameters(n)
    x, _, _ = curve.eval(s)
    dist = cdist(x, x)
    ds = np.abs(s[:, None] - s[None, :])
    if curve.closed:
        ds = np.minimum(ds, TWO_PI - ds)
        min_sep = TWO_PI / 20
    else:
        min_sep = (s[-1] - s[0]) / 20
    far = ds > min_sep
    return float(np.min(dist[far])), float(np.max(dist))


def validate(curve: CurveSpec) -> ValidationReport:
    """Run regularity, seam, asymptote and simpleness checks."""
    checks = []
    s = curve.sample_parameters(SIMPLENESS_SAMPLES)
    x, v, a = curve.eval(s)
    speed = np.linalg.norm(v, axis=1)
    finite = bool(np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.all(np.isfinite(a)))
    regular = finite and bool(np.min(speed) > 1e-12 * np.max(speed))
    checks.append(Check("regularity", regular, f"min |x'| = {np.min(speed):.3g}"))

    if curve.closed:
        if isinstance(curve, Spline):
            jump = curve.seam_jump()
        else:
            ends = [np.concatenate(curve.eval(np.array([t]))).ravel() for t in (0.0, TWO_PI)]
            jump = float(np.max(np.abs(ends[0] - ends[1])))
        scale_ = max(float(np.max(np.abs(x))), float(np.max(speed)), 1.0)
        checks.append(Check("seam", jump <= 1e-9 * scale_, f"max jump {jump:.3g}"))
    else:
        lo, hi = curve.far_parameters()
        _, vf, _ = curve.eval(np.array([lo, hi]))
        t0, t1 = vf[0] / np.linalg.norm(vf[0]), vf[1] / np.linalg.norm(vf[1])
        angle = float(np.arctan2(np.sqrt(wedge_sq(t0, t1)), np.dot(t0, t1)))
        checks.append(Check("asymptote", angle < EPS_DIR, f"end tangents {angle:.3g} rad apart"))

    source = getattr(curve, "simpleness_source", None)
    target = source() if source else curve
    if regular:
        dmin, diam = _min_separated_distance(target, SIMPLENESS_SAMPLES)
        simple = dmin >= PROXIMITY_FLOOR * diam
        checks.append(Check("simple", simple, f"closest approach {dmin:.3g} of diameter {diam:.3g}"))
    else:
        checks.append(Check("simple", False, "skipped: curve not regular"))
    return ValidationReport(checks)
