"""Inversions x -> c + r^2 (x - c) / |x - c|^2 acting on curves."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .curves import TWO_PI, CurveError, CurveSpec, diameter
from .kernel import TOL_OPEN, TruncationPolicy, curve_number_closed, curve_number_open

ANOMALY = 2.0 * np.pi**2
ON_CURVE_FLOOR = 1e-9
DETECTION_SAMPLES = 4096


class ExceptionalInversionError(CurveError):
    """The inversion center lies on the curve where that is not allowed."""


@dataclass(frozen=True, eq=False)
class InversionMap:
    center: np.ndarray
    radius: float = 1.0
    exceptional: bool = False

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise CurveError("inversion radius must be positive")

    def jet(self, x, v, a):
        """Image of position, velocity and acceleration under the map."""
        c, r2 = self.center, self.radius**2
        y = x - c
        q = np.einsum("...i,...i->...", y, y)[..., None]
        yv = np.einsum("...i,...i->...", y, v)[..., None]
        ya = np.einsum("...i,...i->...", y, a)[..., None]
        vv = np.einsum("...i,...i->...", v, v)[..., None]
        pos = c + r2 * y / q
        vel = r2 * (v / q - 2.0 * yv * y / q**2)
        acc = r2 * (a / q - 4.0 * yv * v / q**2 - 2.0 * (vv + ya) * y / q**2
                    + 8.0 * yv**2 * y / q**3)
        return pos, vel, acc


def invert_point(imap: InversionMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = x - imap.center
    q = np.einsum("...i,...i->...", y, y)
    if np.any(q == 0):
        raise ExceptionalInversionError("the inversion center maps to infinity")
    return imap.center + imap.radius**2 * y / q[..., None]


# -- image curves ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InvertedCurve(CurveSpec):
    """Image of a closed curve that avoids the center; same parameter."""

    source: CurveSpec = None
    map: InversionMap = None
    kind = "inverted"
    closed = True

    @property
    def dim(self):
        return self.source.dim

    def _eval(self, s):
        return self.map.jet(*self.source.eval(s))

    def simpleness_source(self):
        return self.source

    def to_dict(self):
        return _image_dict(self)


@dataclass(frozen=True, eq=False)
class InvertedThroughCenter(CurveSpec):
    """Open image of a closed curve passing through the center.

    The parameter t in (-pi, pi) maps to source parameter seam + pi + t, so
    both ends t -> -pi, t -> pi run off to infinity.
    """

    source: CurveSpec = None
    map: InversionMap = None
    seam: float = 0.0
    kind = "inverted"
    closed = False

    @property
    def dim(self):
        return self.source.dim

    @property
    def domain(self):
        return (-np.pi, np.pi)

    def _eval(self, t):
        return self.map.jet(*self.source.eval(self.seam + np.pi + t))

    def window(self, L):
        cut = np.pi / L
        return (-np.pi + cut, np.pi - cut)

    def far_parameters(self):
        cut = 1e-8 * np.pi
        return (-np.pi + cut, np.pi - cut)

    def sample_parameters(self, n):
        lo, hi = self.window(64.0)
        return np.linspace(lo, hi, n)

    def simpleness_source(self):
        return self.source

    def to_dict(self):
        return _image_dict(self)


@dataclass(frozen=True, eq=False)
class InvertedOpen(CurveSpec):
    """Closed image of an open curve; infinity lands on the center.

    The source parameter is s = spread * tan(theta / 2); at theta = pi the
    image point is the center, evaluated from the asymptotic line.
    """

    source: CurveSpec = None
    map: InversionMap = None
    spread: float = 1.0
    kind = "inverted"
    closed = True

    def __post_init__(self):
        self.source.asymptote()

    @property
    def dim(self):
        return self.source.dim

    def _eval(self, theta):
        half = theta / 2.0
        at_center = np.abs(np.cos(half)) < 1e-12
        out = [np.empty((theta.size, self.dim)) for _ in range(3)]
        k = ~at_center
        if np.any(k):
            h = half[k]
            sig = self.spread
            s = sig * np.tan(h)
            ds = sig / (2.0 * np.cos(h) ** 2)
            dds = sig * np.sin(h) / (2.0 * np.cos(h) ** 3)
            y, yv, ya = self.map.jet(*self.source.eval(s))
            out[0][k] = y
            out[1][k] = yv * ds[:, None]
            out[2][k] = ya * (ds**2)[:, None] + yv * dds[:, None]
        if np.any(at_center):
            pos, vel, acc = self._center_jet()
            out[0][at_center], out[1][at_center], out[2][at_center] = pos, vel, acc
        return tuple(out)

    def _center_jet(self):
        # with u = 1/s the image near the center is c + r^2 u (d + q u) / |d + q u|^2
        p, d = self.source.asymptote()
        c, r2, sig = self.map.center, self.map.radius**2, self.spread
        q = p - c
        dd = d @ d
        y1 = r2 * d / dd
        y2 = r2 * (2.0 * q / dd - 4.0 * (d @ q) * d / dd**2)
        # u(theta) = cot(theta/2) / spread: u' = -1/(2 spread), u'' = 0 at theta = pi
        return c, -y1 / (2.0 * sig), y2 / (4.0 * sig**2)

    def simpleness_source(self):
        return self

    def to_dict(self):
        return _image_dict(self)


def _image_dict(curve):
    return {"kind": "inverted", "source": curve.source.to_dict(),
            "center": curve.map.center.tolist(), "radius": curve.map.radius}


def _closest_parameter(curve, center, s):
    """Parameter, distance and sample diameter of the point of ``curve`` nearest ``center``."""
    x, _, _ = curve.eval(s)
    dist = np.linalg.norm(x - center, axis=1)
    i = int(np.argmin(dist))
    h = s[1] - s[0]

    def f(t):
        return float(np.linalg.norm(curve.eval(t)[0][0] - center))

    lo, hi = s[i] - h, s[i] + h
    if not curve.closed:
        lo, hi = max(lo, s[0]), min(hi, s[-1])
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    best = min((res.fun, res.x), (dist[i], s[i]))
    # the bracketing search stalls near sqrt(eps); Newton on (x - c).x' = 0 finishes
    t = best[1]
    for _ in range(4):
        (p,), (v,), (a,) = curve.eval(np.array([t]))
        g, dg = (p - center) @ v, v @ v + (p - center) @ a
        if dg <= 0:
            break
        t_new = t - g / dg
        if abs(t_new - t) > h:
            break
        t = t_new
    d = f(t)
    if d < best[0]:
        best = (d, t)
    return best[1], best[0], diameter(x[::4])


def on_curve(curve: CurveSpec, center) -> tuple[bool, float]:
    """Whether ``center`` lies on ``curve``, and the parameter of the nearest point."""
    center = np.asarray(center, dtype=float)
    if curve.closed:
        s = TWO_PI * np.arange(DETECTION_SAMPLES) / DETECTION_SAMPLES
    else:
        lo, hi = curve.window(8.0)
        mid = curve.eval(np.array([(lo + hi) / 2]))
        reach = np.linalg.norm(center - mid[0][0]) / np.linalg.norm(mid[1][0])
        lo, hi = curve.window(8.0 + 2.0 * reach)
        s = np.linspace(lo, hi, DETECTION_SAMPLES)
    param, dist, diam = _closest_parameter(curve, center, s)
    if curve.closed:
        param %= TWO_PI
    return bool(dist < ON_CURVE_FLOOR * diam), float(param)


def invert_curve(curve: CurveSpec, imap: InversionMap) -> CurveSpec:
    """Image of ``curve``; the returned curve's ``map.exceptional`` flags the center-on-curve case."""
    center = np.asarray(imap.center, dtype=float)
    if center.size != curve.dim:
        raise CurveError("inversion center dimension differs from the curve")
    if curve.closed:
        hit, seam = on_curve(curve, center)
        if hit:
            return InvertedThroughCenter(curve, replace(imap, exceptional=True), seam)
        return InvertedCurve(curve, replace(imap, exceptional=False))
    if on_curve(curve, center)[0]:
        raise ExceptionalInversionError("inversion centered on an open curve is not supported")
    return InvertedOpen(curve, replace(imap, exceptional=False))


# -- reports ---------------------------------------------------------------


@dataclass
class InvarianceReport:
    n_source: float
    n_image: float
    expected_shift: float
    relative_difference: float
    tol: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"n_source": self.n_source, "n_image": self.n_image,
                "expected_shift": self.expected_shift,
                "relative_difference": self.relative_difference,
                "tol": self.tol, "passed": self.passed}


@dataclass
class AnomalyReport:
    n_closed: float
    n_open_image: float
    difference: float
    deviation: float
    tol: float
    passed: bool
    converged: bool

    def to_dict(self):
        return {"n_closed": self.n_closed, "n_open_image": self.n_open_image,
                "difference": self.difference, "expected": ANOMALY,
                "deviation": self.deviation, "tol": self.tol,
                "passed": self.passed, "converged": self.converged}


def check_inversion_invariance(curve: CurveSpec, imap: InversionMap, tol: float = 1e-6,
                               quad_tol: float = 1e-10) -> InvarianceReport:
    """Compare n before and after a non-exceptional inversion.

    An open source curve always acquires the center as the image of its
    point at infinity; its image then carries the +2 pi^2 shift, which the
    report accounts for in ``expected_shift``.
    """
    image = invert_curve(curve, imap)
    if image.map.exceptional:
        raise ExceptionalInversionError(
            "inversion center lies on the curve; use anomaly_check for this case")
    if curve.closed:
        n_src = curve_number_closed(curve, quad_tol).value
        shift = 0.0
    else:
        n_src = curve_number_open(curve, min(quad_tol * 100, TOL_OPEN)).value
        shift = ANOMALY
    n_img = curve_number_closed(image, quad_tol).value
    rel = abs(n_img - n_src - shift) / max(abs(n_img), 1e-300)
    return InvarianceReport(n_src, n_img, shift, rel, tol, rel < tol)


def anomaly_check(curve: CurveSpec, imap: InversionMap, tol: float = 1e-3,
                  quad_tol: float = 1e-8, window_policy: TruncationPolicy | None = None) -> AnomalyReport:
    """n(closed) - n(open image) for an inversion centered on the curve."""
    if not curve.closed:
        raise CurveError("anomaly_check needs a closed source curve")
    image = invert_curve(curve, imap)
    if not image.map.exceptional:
        raise ExceptionalInversionError("inversion center is not on the curve")
    n_closed = curve_number_closed(curve, quad_tol)
    n_open = curve_number_open(image, TOL_OPEN, window_policy)
    diff = n_closed.value - n_open.value
    dev = abs(diff - ANOMALY)
    return AnomalyReport(n_closed.value, n_open.value, diff, dev, tol, dev < tol,
                         n_closed.converged and n_open.converged)
