
import numpy as np
import pytest

from defzeros.errors import InvalidArgument
from defzeros.randmat import abs_det_moment, analytic_abs_det, goe_sample


def test_empty_matrix():
    assert goe_sample(0, seed=1).shape == (0, 0)
    est = abs_det_moment(0, 10, seed=1)
    assert est.mean == 1.0 and est.std_error == 0.0


def test_symmetry_is_exact():
    A = goe_sample(5, seed=2, trial_index=3)
    assert np.array_equal(A, A.T)


def test_analytic_values():
    assert analytic_abs_det(0) == 1.0
    assert analytic_abs_det(1) == pytest.approx(1.128379, abs=1e-6)
    assert analytic_abs_det(2) is None


def test_entry_variances():
    trials = 100_000
    mats = np.stack([goe_sample(2, seed=3, trial_index=i) for i in range(trials)])
    assert mats[:, 0, 0].var() == pytest.approx(2.0, rel=0.03)
    assert mats[:, 0, 1].var() == pytest.approx(1.0, rel=0.03)


def test_batching_does_not_change_the_estimate():
    a = abs_det_moment(2, 3000, seed=4)
    b = abs_det_moment(2, 3000, seed=4, batch=700)
    assert a.mean == pytest.approx(b.mean, rel=1e-14)


@pytest.mark.slow
def test_m2_moment_precision():
    est = abs_det_moment(2, 1_000_000, seed=5)
    assert est.std_error < 0.01
    # E|det| for the 2x2 GOE is about 1.83; record a loose sanity window only
    assert 1.7 < est.mean < 2.0


def test_invalid_arguments():
    with pytest.raises(InvalidArgument):
        goe_sample(-1, seed=0)
    with pytest.raises(InvalidArgument):
        abs_det_moment(1, 0, seed=0)
