import os
import subprocess
import sys

import numpy as np
import pytest

from defzeros import _accel, kernels
from defzeros.poly import sample_kostlan


@pytest.fixture(scope="module")
def poly_and_points():
    p = sample_kostlan(2, 12, seed=31).poly
    pts = np.random.default_rng(0).standard_normal((300, 3))
    return p, pts


def test_poly_eval_backends_agree(poly_and_points):
    p, pts = poly_and_points
    a = kernels.poly_eval_numpy(p.exps, p.coeffs, pts)
    b = kernels.poly_eval_numba(p.exps, p.coeffs, pts)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_poly_eval_grad_backends_agree(poly_and_points):
    p, pts = poly_and_points
    a = kernels.poly_eval_grad_numpy(p.exps, p.coeffs, pts)
    b = kernels.poly_eval_grad_numba(p.exps, p.coeffs, pts)
    assert np.allclose(a, b, rtol=1e-11, atol=1e-11)


def _segment_set(segs, cells):
    return sorted((tuple(np.round(s.ravel(), 12)), tuple(np.atleast_1d(c))) for s, c in zip(segs, cells))


def test_marching_backends_agree():
    x = np.linspace(-1.5, 1.5, 41)
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = X**2 + Y**2 - 1.0
    a = kernels.marching_segments_numpy(vals)
    b = kernels.marching_segments(vals)
    assert len(a[0]) == len(b[0]) > 0
    assert _segment_set(*a) == _segment_set(*b)


def test_connected_labels_backends_agree():
    rng = np.random.default_rng(1)
    pairs = rng.integers(0, 500, size=(400, 2))
    na, la = kernels.connected_labels_numpy(500, pairs)
    nb, lb = kernels.connected_labels(500, pairs)
    assert na == nb
    # same partition up to relabelling
    assert len(set(zip(la.tolist(), lb.tolist()))) == na


def test_backend_reports_switch():
    assert _accel.backend() in ("numba", "numpy")
    env = dict(os.environ, DEFZEROS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from defzeros import _accel; print(_accel.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
