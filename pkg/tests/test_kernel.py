import numpy as np
import pytest

from conftest import TWO_PI_SQ
from curvn.curves import Circle, Ellipse, FourierLoop, Line, OpenBump, curvature, rotate, scale
from curvn.kernel import (SingularKernelError, TruncationPolicy, ValidationError, curve_number,
                          curve_number_closed, curve_number_open, kernel, kernel_grid_csv)
from oracles import bump_jet, dense_closed, dense_open, ellipse_jet

# Dense trapezoid on [-32, 32]^2 with N = 8192 intervals plus the analytic
# C / L^3 tail, tests/oracles.py::dense_open; the next tail order is ~5e-8.
BUMP_ORACLE = 3.3693484


def test_unit_circle_is_two_pi_squared():
    res = curve_number_closed(Circle())
    assert res.converged
    assert abs(res.value - TWO_PI_SQ) < 1e-12 * TWO_PI_SQ
    assert res.grid_size <= 512


def test_three_dimensional_circle():
    c = Circle([0.0, 0.0, 1.0], 2.0)
    tilt = np.array([[1, 0, 0], [0, np.cos(0.4), -np.sin(0.4)], [0, np.sin(0.4), np.cos(0.4)]])
    assert abs(curve_number_closed(rotate(c, tilt)).value - TWO_PI_SQ) < 1e-9


@pytest.mark.parametrize("ecc", [0.5, 0.7, 0.9])
def test_ellipse_against_dense_oracle(ecc):
    b = np.sqrt(1 - ecc * ecc)
    ref = dense_closed(lambda s: ellipse_jet(1.0, b, s), 1024)
    assert abs(curve_number_closed(Ellipse(1.0, ecc), 1e-10).value - ref) < 1e-9 * ref


def test_straight_line_gives_zero():
    res = curve_number_open(Line([0.0, 1.0], [2.0, 1.0]))
    assert abs(res.value) < 1e-10
    assert res.converged


def test_open_bump_against_frozen_oracle():
    res = curve_number_open(OpenBump(1.0, 1.0))
    assert res.converged
    assert abs(res.value - BUMP_ORACLE) < 5e-7


def test_open_bump_against_small_dense_oracle():
    L = 16.0
    ref = dense_open(lambda s: bump_jet(1.0, 1.0, s), L, 2048) + 4 * np.sqrt(np.pi / 2) / (3 * L**3)
    assert abs(curve_number_open(OpenBump(1.0, 1.0)).value - ref) < 5e-6


def test_kernel_is_symmetric(random_loop):
    s, u = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0.05, 6.05, 7))
    assert np.allclose(kernel(random_loop, s, u), kernel(random_loop, u, s), rtol=1e-13)


def test_kernel_diagonal_is_curvature_law():
    e = Ellipse(1.0, 0.6)
    s = np.linspace(0, 6, 13)
    _, v, _ = e.eval(s)
    law = np.sum(v * v, axis=1) * curvature(e, s) ** 2 / 2
    assert np.allclose(kernel(e, s, s), law, rtol=1e-13)


def test_kernel_is_continuous_across_switch():
    e = Ellipse(1.0, 0.6)
    h_in, h_out = 0.9e-4 * 2 * np.pi, 1.1e-4 * 2 * np.pi
    inside = kernel(e, 1.0 - h_in / 2, 1.0 + h_in / 2)
    outside = kernel(e, 1.0 - h_out / 2, 1.0 + h_out / 2)
    assert abs(inside - outside) < 1e-6 * abs(outside)


def test_scale_invariance_of_open_curve():
    a = curve_number_open(OpenBump(1.0, 1.0)).value
    b = curve_number_open(scale(OpenBump(1.0, 1.0), 2.5)).value
    assert abs(a - b) < 1e-6 * a


def test_nonconvergence_is_reported():
    res = curve_number_closed(Ellipse(1.0, 0.99), 1e-14, max_grid=128)
    assert not res.converged
    assert np.isfinite(res.error_estimate)


def test_invalid_curve_is_refused():
    figure_eight = FourierLoop([[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValidationError) as info:
        curve_number_closed(figure_eight)
    assert not info.value.report["simple"].passed


def test_coincident_points_raise():
    with pytest.raises(SingularKernelError):
        kernel(Line([0.0, 0.0], [1.0, 0.0]), np.array([1.0]), np.array([1.0 + 1e-300]), switch=0.0)


def test_thread_count_does_not_change_bits(monkeypatch, random_loop):
    values = []
    for threads in ("1", "4"):
        monkeypatch.setenv("CURVN_THREADS", threads)
        values.append(curve_number_closed(random_loop).value)
    assert values[0] == values[1]


def test_dispatch_and_window_policy():
    assert curve_number(Circle()).value == curve_number_closed(Circle()).value
    res = curve_number(OpenBump(), window_policy=TruncationPolicy(8.0, 16.0))
    assert res.window == 16.0
    assert not res.converged


def test_kernel_grid_csv_shape():
    text = kernel_grid_csv(Circle(), N=8)
    lines = text.splitlines()
    assert lines[0] == "s,u,K"
    assert len(lines) == 65
    assert all(abs(float(l.split(",")[2]) - 0.5) < 1e-12 for l in lines[1:])
