"""Leading-order expectations and bounds for zeros of Kostlan polynomials on Γ.

Each predictor returns a :class:`Prediction` carrying the value, a symbolic
error-order tag, and the inputs and constants it used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidArgument
from .randmat import MomentEstimate, analytic_abs_det


@dataclass(frozen=True)
class Prediction:
    value: float
    order_of_error: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("predictions are nonnegative")


def rp_volume(k):
    """Volume of ``RP^k`` in the round quotient metric: half of ``|S^k|``."""
    if k < 0:
        raise InvalidArgument("k must be nonnegative")
    return math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def _absdet_value(n, e_absdet):
    if e_absdet is None:
        v = analytic_abs_det(n - 2)
        if v is None:
            raise InvalidArgument(f"no closed form for E|det Q_{n - 2}|; pass an estimate")
        return v
    if isinstance(e_absdet, MomentEstimate):
        return e_absdet.mean
    return float(e_absdet)


def kac_rice_constant(n, e_absdet=None):
    """``E|det Q_{n-2}| / (pi (2 pi)^{(n-2)/2})``, the coefficient of ``|Γ| d^{(n-1)/2}``."""
    return _absdet_value(n, e_absdet) / (math.pi * (2 * math.pi) ** ((n - 2) / 2))


def kac_rice_crit_expectation(n, d, gamma_volume, e_absdet=None):
    """Expected number of critical points of a height function on ``Γ ∩ Z(p)``.

    Parameters
    ----------
    n : int
        Ambient projective dimension (``Γ`` is a hypersurface of ``RP^n``).
    d : int
        Degree of the Kostlan polynomial.
    gamma_volume : float
        FS volume ``|Γ|``.
    e_absdet : float or MomentEstimate, optional
        ``E|det Q_{n-2}|``; analytic for ``n <= 3``.

    Notes
    -----
    For ``n = 2`` the matrix is empty and the value is the expected number of
    zeros on the curve, ``|Γ| sqrt(d) / pi``.
    """
    if n < 2:
        raise InvalidArgument("n must be >= 2")
    if not gamma_volume > 0:
        raise InvalidArgument("gamma_volume must be positive")
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    c = kac_rice_constant(n, e_absdet)
    value = gamma_volume / math.pi * d ** ((n - 1) / 2) / (2 * math.pi) ** ((n - 2) / 2) \
        * _absdet_value(n, e_absdet)
    return Prediction(value, f"O(d^({n - 2}/2))",
                      {"n": n, "d": d, "gamma_volume": gamma_volume,
                       "e_absdet": _absdet_value(n, e_absdet), "constant": c})


def integral_geometry_expectation(n, k, gamma_volume, degrees, ensemble="kostlan"):
    """Expected size of ``Γ ∩ Z(p_1) ∩ ... ∩ Z(p_k)`` for a ``k``-dimensional ``Γ``.

    ``kostlan`` uses ``E|Z(p)| = sqrt(d) |RP^{n-1}|``; ``bound`` uses the
    upper bound ``d |RP^{n-1}|`` valid for every invariant ensemble.
    """
    degrees = list(degrees)
    if len(degrees) != k:
        raise InvalidArgument(f"need exactly k={k} degrees")
    if ensemble not in ("kostlan", "bound"):
        raise InvalidArgument("ensemble must be 'kostlan' or 'bound'")
    if not gamma_volume > 0:
        raise InvalidArgument("gamma_volume must be positive")
    value = gamma_volume / rp_volume(k)
    for d in degrees:
        factor = math.sqrt(d) if ensemble == "kostlan" else float(d)
        value *= factor  # E|Z(p)| / |RP^{n-1}|
    return Prediction(value, "exact" if ensemble == "kostlan" else "upper bound",
                      {"n": n, "k": k, "gamma_volume": gamma_volume,
                       "degrees": tuple(degrees), "ensemble": ensemble})


def bezout_bound(deg_gamma, d):
    """Maximal number of isolated points of ``Γ ∩ Z(p)`` for algebraic ``Γ``."""
    if deg_gamma < 1 or d < 1:
        raise InvalidArgument("degrees must be >= 1")
    return int(deg_gamma) * int(d)


def markov_tail_bound(t, d, n, c_gamma):
    """``min(1, c_gamma / (t d^{(n-1)/2}))``."""
    if not t > 0:
        raise InvalidArgument("t must be positive")
    return min(1.0, c_gamma / (t * d ** ((n - 1) / 2)))


def default_betti_constant(n, k, e_absdet=None):
    """Default ``c_{k,n}``.

    For ``k = 0`` and ``n >= 3`` this is half the Kac-Rice constant (every
    closed component carries at least two critical points).  For ``n = 2``
    the components are the points themselves and the full constant is used.
    """
    c = kac_rice_constant(n, e_absdet)
    if k == 0 and n >= 3:
        return c / 2
    return c


def betti_mean_bound(n, k, d, gamma_volume, c_kn=None, e_absdet=None):
    """``|Γ| c_{k,n} d^{(n-1)/2}``, the leading bound on ``E b_k(Γ ∩ Z(p))``."""
    if not 0 <= k <= n - 2:
        raise InvalidArgument("need 0 <= k <= n - 2")
    if not gamma_volume > 0:
        raise InvalidArgument("gamma_volume must be positive")
    c = default_betti_constant(n, k, e_absdet) if c_kn is None else float(c_kn)
    return Prediction(gamma_volume * c * d ** ((n - 1) / 2), f"O(d^({n - 2}/2))",
                      {"n": n, "k": k, "d": d, "gamma_volume": gamma_volume, "c_kn": c})
