"""SVG curve drawings and matplotlib report figures.

The SVG writer is hand-rolled so that its bytes depend only on the curve
and the caption: fixed number formatting, no timestamps, no renderer.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .curves import TWO_PI, CurveSpec

SVG_POINTS = 1024
SVG_SIZE = 512
SVG_MARGIN = 32
CAPTION_HEIGHT = 40


def _curve_points(curve: CurveSpec, n: int, window: float) -> np.ndarray:
    if curve.closed:
        s = TWO_PI * np.arange(n) / n
    else:
        lo, hi = curve.window(window)
        s = np.linspace(lo, hi, n)
    x, _, _ = curve.eval(s)
    return x[:, :2]


def svg_transform(points: np.ndarray):
    """Map from curve coordinates to viewport pixels (uniform scale, y up)."""
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-300))
    scale = (SVG_SIZE - 2 * SVG_MARGIN) / span
    mid = (lo + hi) / 2.0

    def to_view(p):
        p = np.asarray(p, dtype=float)
        u = SVG_SIZE / 2.0 + scale * (p[..., 0] - mid[0])
        v = SVG_SIZE / 2.0 - scale * (p[..., 1] - mid[1])
        return np.stack([u, v], axis=-1)

    return to_view, scale


def export_svg(curve: CurveSpec, n_value: float | None = None, annotations: dict | None = None,
               window: float = 8.0) -> str:
    """SVG 1.1 drawing of ``curve`` with the curve number in the caption.

    Open curves are drawn over ``curve.window(window)``.  3-D curves are
    projected on their first two coordinates.
    """
    pts = _curve_points(curve, SVG_POINTS, window)
    to_view, _ = svg_transform(pts)
    view = to_view(pts)
    coords = " ".join(f"{u:.3f},{v:.3f}" for u, v in view)
    tag = "polygon" if curve.closed else "polyline"
    lines = [f"n = {n_value:.4f}"] if n_value is not None else []
    for key in sorted(annotations or {}):
        lines.append(f"{key}: {annotations[key]}")
    height = SVG_SIZE + CAPTION_HEIGHT * max(len(lines), 1) // 2 + CAPTION_HEIGHT // 2
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" '
        f'height="{height}" viewBox="0 0 {SVG_SIZE} {height}">',
        f'<title>{escape(curve.kind)}</title>',
        f'<rect x="0" y="0" width="{SVG_SIZE}" height="{height}" fill="white"/>',
        f'<{tag} fill="none" stroke="black" stroke-width="1.5" points="{coords}"/>',
    ]
    for i, text in enumerate(lines):
        y = SVG_SIZE + CAPTION_HEIGHT // 2 * i
        out.append(f'<text x="{SVG_SIZE // 2}" y="{y}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_polyline_points(svg: str) -> np.ndarray:
    """Viewport coordinates of the first polygon or polyline in ``svg``."""
    start = svg.index('points="') + len('points="')
    body = svg[start:svg.index('"', start)]
    return np.array([[float(c) for c in pair.split(",")] for pair in body.split()])


# -- matplotlib figures -----------------------------------------------------


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    path = Path(path)
    fig.savefig(path, dpi=120, metadata={"Software": None} if path.suffix == ".png" else None)
    _pyplot().close(fig)
    return path


def plot_table(rows: list[dict], path) -> Path:
    """n / 2 against eccentricity, computed and reference values."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ecc = [r["ecc"] for r in rows]
    ax.plot(ecc, [r["n_half"] for r in rows], "o-", label="computed")
    ax.plot(ecc, [r["reference"] for r in rows], "x", ms=8, label="reference")
    ax.set_xlabel("eccentricity")
    ax.set_ylabel("n / 2")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_minimize(initial: CurveSpec, final: CurveSpec, trace, path) -> Path:
    """Descent history next to the initial and final loops."""
    plt = _pyplot()
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8, 3.5))
    excess = np.maximum(trace.values - 2.0 * np.pi**2, 1e-16)
    ax0.semilogy(np.arange(excess.size), excess, ".-")
    ax0.set_xlabel("iteration")
    ax0.set_ylabel(r"$n - 2\pi^2$")
    for curve, style, label in ((initial, "--", "initial"), (final, "-", "final")):
        p = _curve_points(curve, 400, 8.0)
        p = np.vstack([p, p[:1]])
        ax1.plot(p[:, 0], p[:, 1], style, label=label)
    ax1.set_aspect("equal")
    ax1.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_spectrum(spectrum: dict, path) -> Path:
    """Photon spectrum dN/domega from the far-field route."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(spectrum["omega"], spectrum["dN"], "-")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$dN/d\omega$")
    fig.tight_layout()
    return _save(fig, path)


def plot_curve(curve: CurveSpec, path, window: float = 8.0) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 4))
    p = _curve_points(curve, SVG_POINTS, window)
    if curve.closed:
        p = np.vstack([p, p[:1]])
    ax.plot(p[:, 0], p[:, 1], "-")
    ax.set_aspect("equal")
    fig.tight_layout()
    return _save(fig, path)


__all__ = ["export_svg", "svg_polyline_points", "svg_transform", "plot_table", "plot_minimize",
           "plot_spectrum", "plot_curve", "SVG_POINTS"]
