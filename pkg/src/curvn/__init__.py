"""Curve number n: a conformally motivated double-integral invariant of curves."""

from .conformal import (ANOMALY, ExceptionalInversionError, InversionMap, anomaly_check,
                        check_inversion_invariance, invert_curve, invert_point)
from .curves import (Circle, CurveError, CurveSpec, Ellipse, FourierLoop, Line, OpenBump, Spline,
                     curvature, evaluate, fit_spline, reparameterize, reverse, rotate, scale,
                     translate, validate)
from .kernel import (QuadratureResult, SingularKernelError, TruncationPolicy, ValidationError,
                     curve_number, curve_number_closed, curve_number_open, kernel)
from .optimize import MinimizeOptions, OptimizationTrace, gradient, minimize, objective
from .photon import (InfraredDivergenceError, Inertial, PhotonCount, Wiggle, WorldLine,
                     WorldLineError, boost, photon_number, photon_number_window,
                     spectral_photon_number)
from .plotting import export_svg
from .specio import JobSpec, SpecError, parse_spec, serialize

__version__ = "0.1.0"
