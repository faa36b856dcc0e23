import numpy as np

from curvn.curves import Circle, OpenBump
from curvn.kernel import curve_number_open
from curvn.plotting import SVG_POINTS, export_svg, svg_polyline_points, svg_transform


def test_circle_svg_points_lie_on_circle():
    svg = export_svg(Circle(), 2 * np.pi**2)
    pts = svg_polyline_points(svg)
    assert len(pts) == SVG_POINTS
    to_view, scale = svg_transform(np.array([[-1.0, -1.0], [1.0, 1.0]]))
    center = to_view(np.zeros(2))
    r = np.linalg.norm(pts - center, axis=1) / scale
    assert np.max(np.abs(r - 1.0)) < 1e-3
    assert ">n = 19.7392<" in svg


def test_open_bump_caption_uses_computed_value():
    bump = OpenBump(1.0, 1.0)
    n = curve_number_open(bump).value
    svg = export_svg(bump, n)
    assert f">n = {n:.4f}<" in svg
    assert "<polyline" in svg


def test_annotations_are_escaped_and_sorted():
    svg = export_svg(Circle(), None, {"b": "x<y", "a": "1"})
    assert svg.index("a: 1") < svg.index("b: x&lt;y")
