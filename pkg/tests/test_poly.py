import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defzeros.errors import InvalidArgument
from defzeros.poly import (AffinePolynomial, HomogeneousPolynomial, bombieri_norm, dehomogenize,
                           homogenize, kostlan_kernel, multi_indices, multinomial_coeff,
                           sample_kostlan)


@pytest.mark.parametrize("d, alpha, expected", [
    (3, (1, 1, 1), 6),
    (7, (7, 0, 0), 1),
    (4, (2, 2), 6),
])
def test_multinomial(d, alpha, expected):
    assert multinomial_coeff(d, alpha) == expected


def test_multinomial_rejects_wrong_degree():
    with pytest.raises(InvalidArgument):
        multinomial_coeff(3, (1, 1))


def test_multi_indices_count_and_order():
    rows = multi_indices(3, 4)
    assert rows.shape == (math.comb(6, 2), 3)
    assert tuple(rows[0]) == (4, 0, 0)
    assert tuple(rows[-1]) == (0, 0, 4)
    assert np.all(rows.sum(axis=1) == 4)


def test_sampling_is_deterministic():
    a = sample_kostlan(2, 5, seed=0, trial_index=0)
    b = sample_kostlan(2, 5, seed=0, trial_index=0)
    assert np.array_equal(a.poly.coeffs, b.poly.coeffs)
    c = sample_kostlan(2, 5, seed=0, trial_index=1)
    assert not np.array_equal(a.poly.coeffs, c.poly.coeffs)


@pytest.mark.slow
def test_sampling_statistics():
    trials = 100_000
    x = np.array([0.6, 0.0, 0.8])
    first = np.empty(trials)
    values = np.empty(trials)
    for i in range(trials):
        s = sample_kostlan(2, 3, seed=11, trial_index=i)
        first[i] = s.xi[0]  # multi-index (3, 0, 0) comes first
        values[i] = s.poly.evaluate(x)
    assert abs(first.mean()) <= 0.02
    assert 0.98 <= first.var() <= 1.02
    assert abs(values.var() - 1.0) <= 0.02


def test_evaluate_examples():
    p = HomogeneousPolynomial.from_terms(2, 2, {(2, 0, 0): 1})
    assert p.evaluate([3, 4, 0]) == 9
    q = HomogeneousPolynomial.from_terms(2, 2, {(2, 0, 0): 1, (0, 2, 0): 1})
    assert q.evaluate([3, 4, 0]) == 25


def test_homogeneity():
    rng = np.random.default_rng(1)
    for i in range(20):
        p = sample_kostlan(2, 6, seed=3, trial_index=i).poly
        x = rng.standard_normal(3)
        lhs = p.evaluate(x)
        rhs = 2.0 ** 6 * p.evaluate(x / 2.0)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_gradient_example():
    p = HomogeneousPolynomial.from_terms(1, 2, {(1, 1): 1})
    assert np.allclose(p.gradient([1.0, 1.0]), [1.0, 1.0])


def test_euler_identity():
    rng = np.random.default_rng(2)
    for i in range(100):
        d = int(rng.integers(1, 9))
        p = sample_kostlan(2, d, seed=4, trial_index=i).poly
        x = rng.standard_normal(3)
        lhs = x @ p.gradient(x)
        rhs = d * p.evaluate(x)
        scale = np.linalg.norm(x) ** d * bombieri_norm(p)
        assert abs(lhs - rhs) <= 1e-10 * scale


def test_gradient_finite_difference():
    rng = np.random.default_rng(3)
    p = sample_kostlan(3, 3, seed=5).poly
    x = rng.standard_normal(4)
    g = p.gradient(x)
    h = 1e-5
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fd = (p.evaluate(x + e) - p.evaluate(x - e)) / (2 * h)
        assert fd == pytest.approx(g[i], rel=1e-6, abs=1e-8)


def test_second_derivatives_symmetric_and_consistent():
    p = sample_kostlan(2, 4, seed=6).poly
    x = np.array([0.3, -1.2, 0.7])
    H = p.second_derivatives(x)
    assert np.allclose(H, H.T)
    # Euler for the gradient: H x = (d - 1) grad
    assert np.allclose(H @ x, 3 * p.gradient(x))


def test_many_point_kernels_match_scalar_evaluation():
    rng = np.random.default_rng(4)
    p = sample_kostlan(2, 7, seed=8).poly
    pts = rng.standard_normal((50, 3))
    vals = p.evaluate_many(pts)
    vg = p.value_and_gradient_many(pts)
    for i in range(50):
        assert vals[i] == pytest.approx(p.evaluate(pts[i]), rel=1e-12, abs=1e-12)
        assert np.allclose(vg[i, 1:], p.gradient(pts[i]), rtol=1e-10, atol=1e-10)


def test_homogenize_example():
    # q(x, y) = y - x^2 in coordinates [x0 : x : y]
    q = AffinePolynomial(2, {(0, 1): 1, (2, 0): -1})
    p = homogenize(q, 2)
    assert p.terms() == {(1, 0, 1): 1, (0, 2, 0): -1}
    back = dehomogenize(p)
    assert back.coeffs == q.coeffs


def test_homogenize_preserves_zeros():
    rng = np.random.default_rng(5)
    q = AffinePolynomial(2, {(0, 1): 1, (2, 0): -1})
    p = homogenize(q, 3)
    for _ in range(100):
        x = rng.uniform(-2, 2)
        on = (x, x * x)
        assert abs(p.evaluate([1.0, *on])) < 1e-12
        off = (x, x * x + 0.5)
        assert abs(p.evaluate([1.0, *off])) > 0.1


def test_homogenize_rejects_low_degree():
    q = AffinePolynomial(2, {(3, 0): 1})
    with pytest.raises(InvalidArgument):
        homogenize(q, 2)


def test_covariance_kernel_identity():
    # K(x, y) = <x, y>^d by the multinomial theorem
    rng = np.random.default_rng(6)
    for _ in range(20):
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        for d in (1, 4, 9):
            scale = (np.linalg.norm(x) * np.linalg.norm(y)) ** d
            assert abs(kostlan_kernel(x, y, d) - (x @ y) ** d) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), lam=st.floats(0.25, 4.0), d=st.integers(1, 6))
def test_homogeneity_property(seed, lam, d):
    p = sample_kostlan(2, d, seed=seed).poly
    x = np.array([0.4, -0.3, 0.9])
    assert p.evaluate(lam * x) == pytest.approx(lam ** d * p.evaluate(x), rel=1e-10, abs=1e-12)
