import math

import numpy as np
import pytest

from defzeros.errors import ChartOverflow, DegenerateInput, InvalidArgument
from defzeros.geometry import (Circle, Ellipsoid, MorseFunctionSpec, ProjectiveLine,
                               SampledCurve, chart_curve_length, curve_from_descriptor,
                               fs_area, fs_length, fs_metric_at, haar_rotation,
                               latitude_band_area, projective_distance, rotate,
                               surface_from_descriptor, validate_curve, validate_surface)


def test_metric_at_origin_is_identity():
    assert np.array_equal(fs_metric_at([0.0, 0.0]), np.eye(2))
    assert np.array_equal(fs_metric_at([0.0, 0.0, 0.0]), np.eye(3))


def test_metric_eigenvalues():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        t = rng.standard_normal(n)
        s = 1.0 + t @ t
        ev = np.sort(np.linalg.eigvalsh(fs_metric_at(t)))
        expected = np.sort([1 / s] * (n - 1) + [1 / s**2])
        assert np.allclose(ev, expected, rtol=1e-12)


def test_metric_matches_sphere_lift_distance():
    rng = np.random.default_rng(1)
    for _ in range(10):
        t = rng.standard_normal(2)
        v = rng.standard_normal(2)
        for h in (1e-3, 1e-4):
            X = np.array([1.0, *t])
            Y = np.array([1.0, *(t + h * v)])
            dist = projective_distance(X, Y)[0]
            metric = math.sqrt(h * v @ fs_metric_at(t) @ (h * v))
            assert abs(dist - metric) <= 5 * h * h * (1 + v @ v)


def test_circle_length():
    assert fs_length(Circle()) == pytest.approx(math.pi * math.sqrt(2), abs=1e-6)
    for r in (0.25, 0.5, 2.0):
        expected = 2 * math.pi * r / math.sqrt(1 + r * r)
        assert fs_length(Circle(radius=r)) == pytest.approx(expected, rel=1e-9)
        assert chart_curve_length(Circle(radius=r)) == pytest.approx(expected, rel=1e-9)


def test_projective_line_length():
    assert fs_length(ProjectiveLine()) == pytest.approx(math.pi, rel=1e-12)
    validate_curve(ProjectiveLine())


def test_sampled_circle_close_to_exact():
    t = np.linspace(0.0, 1.0, 200, endpoint=False)
    pts = np.column_stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)])
    curve = SampledCurve(t, pts)
    validate_curve(curve)
    assert fs_length(curve) == pytest.approx(math.pi * math.sqrt(2), rel=1e-6)


def test_sampled_curve_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        SampledCurve([0, 1, 2], [[0, 0], [1, 0], [0, 1]])
    with pytest.raises(InvalidArgument):
        SampledCurve([0, 2, 1, 3], np.zeros((4, 2)))


def test_zero_speed_detected():
    t = np.linspace(0.0, 1.0, 8, endpoint=False)
    with pytest.raises(DegenerateInput):
        validate_curve(SampledCurve(t, np.zeros((8, 2))))


def test_unit_sphere_area_two_ways():
    area = fs_area(Ellipsoid())
    assert area == pytest.approx(latitude_band_area(0.0, 1.0), rel=1e-6)
    # the lift covers a hemisphere of S^3 worth of great circles: a round 2-sphere
    # of radius 1/sqrt(2) has area 2 pi
    assert area == pytest.approx(2 * math.pi, rel=1e-9)


def test_off_center_sphere_area_two_ways():
    surf = Ellipsoid(center=(0.0, 0.0, 0.7), A=(0.5, 0.5, 0.5))
    assert fs_area(surf) == pytest.approx(latitude_band_area(0.7, 0.5), rel=1e-6)


def test_tiny_sphere_is_euclidean():
    r = 0.01
    assert fs_area(Ellipsoid(A=(r, r, r))) == pytest.approx(4 * math.pi * r * r, rel=1e-3)


def test_area_converged():
    a = fs_area(Ellipsoid(A=(1.0, 0.7, 0.4)), start=16, max_nodes=16)
    b = fs_area(Ellipsoid(A=(1.0, 0.7, 0.4)), start=32, max_nodes=32)
    assert abs(a - b) < 1e-6 * b


def test_validate_surface():
    assert validate_surface(Ellipsoid(A=(1.0, 2.0, 0.5)))


def test_haar_rotation():
    for i in range(5):
        R = haar_rotation(2, seed=7, trial_index=i)
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
        assert abs(abs(np.linalg.det(R)) - 1.0) < 1e-12


def test_rotation_preserves_length():
    c = Circle(center=(0.2, -0.1), radius=0.5)
    for i in range(5):
        R = haar_rotation(2, seed=8, trial_index=i)
        try:
            rc = rotate(c, R)
        except ChartOverflow:
            continue
        assert fs_length(rc) == pytest.approx(fs_length(c), rel=1e-7)


def test_rotated_sphere_area():
    R = haar_rotation(3, seed=9)
    try:
        surf = rotate(Ellipsoid(A=(0.4, 0.4, 0.4)), R)
    except ChartOverflow:
        pytest.skip("rotation left every chart")
    assert fs_area(surf) == pytest.approx(fs_area(Ellipsoid(A=(0.4, 0.4, 0.4))), rel=1e-6)


def test_morse_spec_needs_unit_vector():
    MorseFunctionSpec((0.0, 0.0, 1.0))
    with pytest.raises(InvalidArgument):
        MorseFunctionSpec((1.0, 1.0, 0.0))


def test_descriptors_round_trip():
    c = Circle(center=(0.5, 0.25), radius=0.75)
    back = curve_from_descriptor(c.descriptor())
    assert np.allclose(back.lift([0.1, 0.6]), c.lift([0.1, 0.6]))
    line = curve_from_descriptor({"gamma.family": "projective_line", "gamma.axes": "1,2"})
    assert line.axes == (1, 2)
    surf = surface_from_descriptor({"family": "ellipsoid", "radii": "1,2,3"})
    assert isinstance(surf, Ellipsoid)
    with pytest.raises(InvalidArgument):
        curve_from_descriptor({"family": "spiral"})
