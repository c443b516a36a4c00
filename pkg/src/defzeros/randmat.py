"""GOE matrices (diagonal variance 2, off-diagonal variance 1) and E|det|.

This normalization is the one met by the Hessian of a Kostlan polynomial at
the chart centre after dividing by ``sqrt(d (d - 1))``: the second partials
``d^2 p / dx_i^2`` carry the weight ``sqrt(d(d-1)/2) * 2 = sqrt(2 d (d-1))``
and the mixed ones ``sqrt(d (d - 1))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .rng import GOE, trial_generator


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    std_error: float
    trials: int
    analytic: float | None = None


def goe_sample(m, seed, trial_index=0):
    """One ``m x m`` GOE matrix drawn from the trial's GOE stream.

    Upper-triangle entries are drawn row by row; the diagonal gets variance 2.
    """
    if m < 0:
        raise InvalidArgument("m must be nonnegative")
    if m == 0:
        return np.zeros((0, 0))
    rng = trial_generator(seed, trial_index, GOE)
    iu = np.triu_indices(m)
    z = rng.standard_normal(iu[0].size)
    z[iu[0] == iu[1]] *= math.sqrt(2.0)
    A = np.zeros((m, m))
    A[iu] = z
    return A + np.triu(A, 1).T


def analytic_abs_det(m):
    """Closed forms for ``m <= 1``: ``1`` and ``E|N(0, 2)| = 2 / sqrt(pi)``."""
    if m == 0:
        return 1.0
    if m == 1:
        return 2.0 / math.sqrt(math.pi)
    return None


def _pairwise_sum(x):
    # numpy's sum is already pairwise for contiguous float arrays
    return float(np.sum(np.ascontiguousarray(x, dtype=np.float64)))


def abs_det_moment(m, trials, seed, batch=65536):
    """Monte Carlo estimate of ``E|det Q_m|`` with its standard error.

    Trial ``i`` uses the matrix ``goe_sample(m, seed, i)``; the estimate is
    therefore identical however the trials are batched or distributed.
    """
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    if m == 0:
        return MomentEstimate(1.0, 0.0, int(trials), 1.0)
    vals = np.empty(trials)
    for start in range(0, trials, batch):
        stop = min(trials, start + batch)
        mats = np.stack([goe_sample(m, seed, i) for i in range(start, stop)])
        vals[start:stop] = np.abs(np.linalg.det(mats))
    mean = _pairwise_sum(vals) / trials
    if trials > 1:
        var = _pairwise_sum((vals - mean) ** 2) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = math.inf
    return MomentEstimate(mean, se, int(trials), analytic_abs_det(m))
