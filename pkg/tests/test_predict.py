import math

import mpmath
import pytest

from defzeros.errors import InvalidArgument
from defzeros.predict import (betti_mean_bound, bezout_bound, integral_geometry_expectation,
                              kac_rice_crit_expectation, markov_tail_bound, rp_volume)
from defzeros.randmat import MomentEstimate


def test_rp_volumes():
    assert rp_volume(0) == pytest.approx(1.0)
    assert rp_volume(1) == pytest.approx(math.pi)
    assert rp_volume(2) == pytest.approx(2 * math.pi)


def test_projective_line_count():
    assert kac_rice_crit_expectation(2, 9, math.pi).value == pytest.approx(3.0, rel=1e-14)


def test_circle_count():
    v = kac_rice_crit_expectation(2, 9, math.pi * math.sqrt(2)).value
    assert v == pytest.approx(3 * math.sqrt(2), rel=1e-14)


def test_surface_leading_term_two_ways():
    v = kac_rice_crit_expectation(3, 16, math.pi ** 2).value
    pi = mpmath.pi
    ref = pi ** 2 * 16 / (pi * mpmath.sqrt(2 * pi)) * (2 / mpmath.sqrt(pi))
    assert v == pytest.approx(float(ref), rel=1e-13)


def test_moment_estimate_is_accepted():
    est = MomentEstimate(1.5, 0.01, 1000)
    a = kac_rice_crit_expectation(4, 4, 1.0, est).value
    b = kac_rice_crit_expectation(4, 4, 1.0, 1.5).value
    assert a == b
    with pytest.raises(InvalidArgument):
        kac_rice_crit_expectation(4, 4, 1.0)


def test_integral_geometry():
    assert integral_geometry_expectation(2, 1, math.pi, [4]).value == pytest.approx(2.0)
    assert integral_geometry_expectation(2, 1, math.pi, [4], "bound").value == pytest.approx(4.0)
    circle = math.pi * math.sqrt(2)
    ig = integral_geometry_expectation(2, 1, circle, [4]).value
    assert ig == pytest.approx(2 * math.sqrt(2))
    assert ig == pytest.approx(kac_rice_crit_expectation(2, 4, circle).value)


def test_bezout():
    assert bezout_bound(2, 7) == 14
    assert bezout_bound(1, 5) == 5
    assert bezout_bound(2, 1) == 2


def test_markov():
    assert markov_tail_bound(1, 4, 2, 1.0) == pytest.approx(0.5)
    ts = [0.5, 1, 2, 4]
    vals = [markov_tail_bound(t, 9, 2, 1.0) for t in ts]
    assert vals == sorted(vals, reverse=True)
    ds = [1, 4, 16, 64]
    vals = [markov_tail_bound(1.0, d, 3, 2.0) for d in ds]
    assert vals == sorted(vals, reverse=True)
    with pytest.raises(InvalidArgument):
        markov_tail_bound(0, 4, 2, 1.0)


def test_betti_bounds():
    circle = math.pi * math.sqrt(2)
    assert betti_mean_bound(2, 0, 9, circle).value == pytest.approx(
        kac_rice_crit_expectation(2, 9, circle).value)
    kr = kac_rice_crit_expectation(3, 16, math.pi ** 2).value
    assert betti_mean_bound(3, 0, 16, math.pi ** 2).value == pytest.approx(kr / 2)
    vals = [betti_mean_bound(3, 0, d, 1.0).value for d in (1, 4, 9, 16)]
    assert vals == sorted(vals)
    with pytest.raises(InvalidArgument):
        betti_mean_bound(3, 2, 4, 1.0)
