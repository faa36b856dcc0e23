"""Curve number of ellipses against eccentricity, next to published values."""

from __future__ import annotations

from .curves import Ellipse
from .kernel import MAX_GRID, TOL_CLOSED, curve_number_closed

# (eccentricity, published n / 2, allowed relative deviation)
REFERENCE = (
    (0.0, 9.83, 0.03),
    (0.5, 9.93, 0.03),
    (0.7, 10.4, 0.03),
    (0.9, 13.4, 0.03),
    (0.95, 17.2, 0.08),
    (0.99, 35.2, 0.08),
)


def eccentricity_table(tol: float = TOL_CLOSED, max_grid: int = MAX_GRID) -> list[dict]:
    """One row per reference eccentricity, with n, n / 2 and the relative deviation."""
    rows = []
    for ecc, ref, band in REFERENCE:
        res = curve_number_closed(Ellipse(1.0, ecc), tol, max_grid)
        half = res.value / 2.0
        dev = abs(half - ref) / ref
        rows.append({"ecc": ecc, "n": res.value, "n_half": half, "reference": ref,
                     "relative_deviation": dev, "band": band, "within_band": dev <= band,
                     "grid_size": res.grid_size, "error_estimate": res.error_estimate,
                     "converged": res.converged})
    return rows


def strictly_increasing(rows: list[dict]) -> bool:
    return all(b["n"] > a["n"] for a, b in zip(rows, rows[1:]))
