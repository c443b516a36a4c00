"""Staged construction of a curve carrying prescribed numbers of zeros.

For a target sequence of point counts the builder produces a compact C²
curve ``Γ`` in the affine plane ``x_0 = 1`` of ``RP^2`` and polynomials
``P_k(x, y) = y - sum_{j=2}^{k} Q_j(x)`` of degree ``d_k`` whose zero sets
meet the graph portion of ``Γ`` in a controlled number of transversal
points.

Construction
------------
Stage ``k`` (``k >= 2``) picks a monic ``q_k`` with ``r_k`` simple roots in
``D1 = [1/2, 3/2]`` and sets

    Q_k(x) = c_k x^{2 d_{k-1}} q_k(x),   d_k = 2 d_{k-1} + r_k,   d_1 = 1,

with ``c_k`` a power of two small enough that
``||Q_k||_{C^1(D2)} <= min(1/2, delta_2, ..., delta_{k-1}) 2^{-(k+1)}`` on
``D2 = [1/3, 5/3]``.  ``delta_k`` is a robustness radius of ``Q_k`` on
``D1`` (see :func:`margin_delta`).  The curve is the graph of
``g = rho * sum_k Q_k`` over ``D2`` closed by two quintic Hermite arcs
through ``(1, -1)``; ``rho`` is a C² bump equal to 1 on ``D1``.

On the graph over ``D1``, ``P_k(x, g(x)) = sum_{j > k} Q_j(x)``.  The
leading term ``Q_{k+1}`` has the ``r_{k+1}`` roots of ``q_{k+1}`` and the
rest is smaller than ``delta_{k+1}`` in ``C^1``, so the count survives.
Stage ``k`` therefore carries ``r_{k+1}`` zeros; the last stage has no
successor and is not verified.

Why ``delta`` works
-------------------
Let ``delta = min(m / 2, |Q(a)|, |Q(b)|)`` where ``m`` is the minimum of
``max(|Q|, |Q'|)`` over ``[a, b]``, and let ``||h||_{C^1} <= delta``.  On
``{|Q| >= 2 delta}`` we have ``|Q + h| >= delta > 0``.  On each component
of ``{|Q| < 2 delta}`` we have ``|Q'| >= 2 delta > |h'|``, so ``Q + h`` is
strictly monotone there.  An interior component runs from ``-2 delta`` to
``2 delta`` (or back), and both ``Q`` and ``Q + h`` vanish exactly once on
it.  A component touching an end keeps the sign of ``Q`` at that end,
because ``|Q(end)| >= delta``.  Hence ``Q`` and ``Q + h`` have the same
number of zeros on ``[a, b]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2
import numpy as np

from .errors import ConstructionFailure, InvalidArgument
from .geometry import ParamCurve, validate_curve
from .intersect import TANGENCY_THRESHOLD, count_zeros_on_curve
from .io import format_key_values, read_poly, write_csv, write_poly
from .poly import AffinePolynomial, HomogeneousPolynomial, bombieri_norm, homogenize, kostlan_weights
from .rng import PERTURB, trial_generator

D1 = (Fraction(1, 2), Fraction(3, 2))
D2 = (Fraction(1, 3), Fraction(5, 3))
#: parameter range of the graph over ``D1``
D_PORTION = (1.0 / 16.0, 7.0 / 16.0)
#: floor used in place of ``delta_1`` when scaling the first stage
FIRST_DELTA = 0.5
NORM_GRID = 4096
CERTIFICATE_FIELDS = ("stage", "degree", "required", "verified", "min_margin", "pass")


# ---------------------------------------------------------------------------
# univariate building blocks

def seifert_points_poly(points):
    """Monic polynomial with simple roots at the given points of ``D1``.

    Parameters
    ----------
    points : sequence of float or Fraction
        Distinct points inside the open interval ``(1/2, 3/2)``.

    Returns
    -------
    AffinePolynomial
        ``prod(x - x_i)``; exact when the points are rational.
    """
    pts = list(points)
    if not pts:
        raise InvalidArgument("need at least one point")
    if len(set(pts)) != len(pts):
        raise InvalidArgument("points must be distinct")
    for x in pts:
        if not D1[0] < x < D1[1]:
            raise InvalidArgument(f"point {x} is not inside the open interval (1/2, 3/2)")
    return AffinePolynomial.from_roots(pts)


def prescribed_roots(count):
    """``count`` equispaced rationals in ``D1``: midpoints of ``count`` equal cells."""
    if count < 1:
        raise InvalidArgument("need at least one root per stage")
    return tuple(D1[0] + Fraction(2 * i + 1, 2 * count) for i in range(count))


def _taylor_linear_product(x, roots, order):
    """Derivatives ``0..order`` of ``prod(x - r)`` at the points ``x``."""
    T = np.zeros((order + 1, x.size))
    T[0] = 1.0
    j = np.arange(order + 1)[:, None]
    for r in roots:
        shifted = np.zeros_like(T)
        shifted[1:] = T[:-1]
        T = T * (x - float(r)) + j * shifted
    return T


def _taylor_power(x, m, order):
    out = np.zeros((order + 1, x.size))
    for j in range(min(order, m) + 1):
        out[j] = math.perm(m, j) * x ** (m - j)
    return out


def _leibniz(F, G):
    order = F.shape[0] - 1
    out = np.zeros_like(F)
    for j in range(order + 1):
        for i in range(j + 1):
            out[j] += math.comb(j, i) * F[i] * G[j - i]
    return out


class ScaledRootPoly:
    """``2^exponent * x^shift * prod(x - r)``, evaluated in product form.

    The product form keeps full relative accuracy near the roots, where the
    expanded coefficients would cancel catastrophically.
    """

    def __init__(self, roots, shift=0, exponent=0):
        self.roots = tuple(Fraction(r) for r in roots)
        self.shift = int(shift)
        self.exponent = int(exponent)

    @property
    def degree(self):
        return self.shift + len(self.roots)

    @property
    def scale(self):
        return Fraction(2) ** self.exponent

    def with_exponent(self, exponent):
        return ScaledRootPoly(self.roots, self.shift, exponent)

    def derivs(self, x, order=3):
        """Array of shape ``(order + 1, len(x))`` with the derivatives."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        T = _leibniz(_taylor_power(x, self.shift, order),
                     _taylor_linear_product(x, self.roots, order))
        return np.ldexp(T, self.exponent)

    def __call__(self, x):
        return self.derivs(x, 0)[0]

    def derivs_mp(self, x, roots_mp):
        """Value and first derivative at an ``mpfr`` point (current context)."""
        v, dv = gmpy2.mpfr(1), gmpy2.mpfr(0)
        for r in roots_mp:
            f = x - r
            v, dv = v * f, dv * f + v
        if self.shift:
            xm1 = x ** (self.shift - 1)
            v, dv = v * xm1 * x, dv * xm1 * x + self.shift * xm1 * v
        s = gmpy2.mul_2exp(gmpy2.mpfr(1), self.exponent)
        return v * s, dv * s

    def to_affine(self):
        """Exact expanded form as a univariate :class:`AffinePolynomial`."""
        q = AffinePolynomial.from_roots(self.roots)
        c = self.scale
        return AffinePolynomial(1, {(a[0] + self.shift,): c * v for a, v in q.coeffs.items()})

    def root_slopes(self):
        """``|Q'(r)|`` at every root, in floating point."""
        rs = [float(r) for r in self.roots]
        out = []
        for i, r in enumerate(rs):
            v = math.ldexp(r ** self.shift, self.exponent)
            for j, s in enumerate(rs):
                if j != i:
                    v *= r - s
            out.append(abs(v))
        return np.array(out)


def _as_derivs(f, order=3):
    """Turn ``f`` into ``x -> array of derivatives`` (at least value and first)."""
    if isinstance(f, ScaledRootPoly) or hasattr(f, "derivs"):
        return lambda x: f.derivs(x, order)
    if isinstance(f, AffinePolynomial):
        if f.m != 1:
            raise InvalidArgument("expected a univariate polynomial")
        deg = f.degree
        c = np.zeros(deg + 1)
        for (a,), v in f.coeffs.items():
            c[a] = float(v)
        polys = [np.polynomial.Polynomial(c)]
        for _ in range(order):
            polys.append(polys[-1].deriv())
        return lambda x: np.array([p(np.asarray(x, dtype=np.float64)) for p in polys])
    if callable(f):
        return lambda x: np.asarray(f(x), dtype=np.float64)
    raise InvalidArgument(f"cannot evaluate {type(f).__name__}")


def c1_norm(f, interval, grid=NORM_GRID):
    """Upper estimate of ``sup|f| + sup|f'|`` on a closed interval.

    Grid maxima on ``grid + 1`` nodes, each corrected upward by half a cell
    times a bound on the next derivative.

    Parameters
    ----------
    f : ScaledRootPoly, AffinePolynomial or callable
        A callable must map an array ``x`` to ``(f, f', f'', ...)``.
    interval : (float, float)
    grid : int
        Number of cells.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise InvalidArgument("interval must have positive length")
    x = np.linspace(a, b, grid + 1)
    V = np.abs(_as_derivs(f)(x))
    half = 0.5 * (b - a) / grid
    B2 = V[2].max() + (half * V[3].max() if V.shape[0] > 3 else 0.0)
    B1 = V[1].max() + half * B2
    B0 = V[0].max() + half * B1
    return float(B0 + B1)


def _cell_lower_bound(V_a, V_b, width):
    """Lower bound of ``max(|f|, |f'|)`` on a cell from end-point derivatives."""
    half = 0.5 * width
    L3 = 2.0 * np.maximum(V_a[3], V_b[3])
    L2 = np.maximum(V_a[2], V_b[2]) + half * L3
    L1 = np.maximum(V_a[1], V_b[1]) + half * L2
    low_f = 0.5 * (V_a[0] + V_b[0] - width * L1)
    low_df = 0.5 * (V_a[1] + V_b[1] - width * L2)
    return np.maximum(low_f, low_df)


def margin_delta(Q, interval=D1, grid=NORM_GRID, max_depth=12):
    """Radius ``delta`` of ``C^1`` perturbations preserving the zero count.

    ``delta = min(m / 2, |Q(a)|, |Q(b)|)`` with ``m = min max(|Q|, |Q'|)``
    over ``[a, b]``.  ``m`` is bounded from below cell by cell using the
    end-point derivatives; cells where the bound is not positive are
    bisected up to ``max_depth`` times.

    Raises
    ------
    ConstructionFailure
        If some cell cannot be certified, i.e. ``Q`` has a (near) multiple
        root there.
    """
    F = _as_derivs(Q, 3)
    a, b = float(interval[0]), float(interval[1])
    x = np.linspace(a, b, grid + 1)
    V = np.abs(F(x))
    if V.shape[0] < 4:
        V = np.vstack([V, np.zeros((4 - V.shape[0], V.shape[1]))])
    lows = _cell_lower_bound(V[:, :-1], V[:, 1:], (b - a) / grid)
    best = float(lows[lows > 0].min()) if np.any(lows > 0) else math.inf
    bad = np.flatnonzero(~(lows > 0))
    lo, hi = x[bad], x[bad + 1]
    for _ in range(max_depth):
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        pts = np.concatenate([lo, hi])
        W = np.abs(F(pts))
        if W.shape[0] < 4:
            W = np.vstack([W, np.zeros((4 - W.shape[0], W.shape[1]))])
        n = lo.size
        low = _cell_lower_bound(W[:, :n], W[:, n:], hi - lo)
        if np.any(low > 0):
            best = min(best, float(low[low > 0].min()))
        keep = ~(low > 0)
        lo, hi = lo[keep], hi[keep]
    if lo.size:
        where = 0.5 * (lo[0] + hi[0])
        raise ConstructionFailure(
            f"zero is not a regular value: no positive margin near x={where:.12g}")
    ends = np.abs(F(np.array([a, b]))[0])
    delta = min(0.5 * best, float(ends.min()))
    if not delta > 0:
        raise ConstructionFailure("polynomial vanishes at an end of the interval")
    return delta


def choose_scale(q_next, prior_deltas, k, shift=0, interval=D2):
    """Exponent ``e`` of the largest ``c = 2^e`` meeting the stage bound.

    The bound is ``||c x^shift q_next||_{C^1(D2)} <= min(prior_deltas) 2^{-(k+1)}``.

    Parameters
    ----------
    q_next : ScaledRootPoly or sequence of roots
        The unscaled root polynomial (its own exponent and shift are ignored
        when ``shift`` is given for a plain root list).
    prior_deltas : sequence of float
    k : int
        Stage index of the polynomial being scaled.
    shift : int
        Power of ``x`` multiplying ``q_next``.

    Returns
    -------
    int
    """
    prior = [float(v) for v in prior_deltas]
    if not prior or not all(v > 0 for v in prior):
        raise InvalidArgument("prior_deltas must be nonempty and positive")
    if isinstance(q_next, ScaledRootPoly):
        base = q_next.with_exponent(0)
    else:
        base = ScaledRootPoly(q_next, shift, 0)
    with np.errstate(over="ignore"):
        norm = c1_norm(base, interval)
    if not math.isfinite(norm):
        raise ConstructionFailure("stage polynomial overflows on D2; use fewer stages")
    target = min(prior) * 2.0 ** (-(k + 1))
    e = math.floor(math.log2(target / norm))
    while math.ldexp(norm, e) > target:
        e -= 1
    while math.ldexp(norm, e + 1) <= target:
        e += 1
    if e < -1000 or math.ldexp(1.0, e) == 0.0:
        raise ConstructionFailure(
            f"scale 2^{e} underflows double precision; use fewer stages or smaller targets")
    return e


# ---------------------------------------------------------------------------
# cutoff and the assembled function

def _smoothstep(u, order=2):
    u = np.clip(u, 0.0, 1.0)
    s = u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
    ds = 30.0 * u * u * (1.0 - u) ** 2
    d2s = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return np.array([s, ds, d2s][:order + 1])


@dataclass(frozen=True)
class Bump:
    """C² cutoff: 1 on ``inner``, 0 outside ``outer``, quintic smoothstep between."""

    inner: tuple = D1
    outer: tuple = D2

    def __post_init__(self):
        a1, b1 = map(float, self.inner)
        a2, b2 = map(float, self.outer)
        if not (a2 < a1 < b1 < b2):
            raise InvalidArgument("inner interval must lie strictly inside the outer one")

    def derivs(self, x, order=2):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        a1, b1 = map(float, self.inner)
        a2, b2 = map(float, self.outer)
        out = np.zeros((order + 1, x.size))
        out[0][(x >= a1) & (x <= b1)] = 1.0
        left = (x > a2) & (x < a1)
        if np.any(left):
            w = a1 - a2
            S = _smoothstep((x[left] - a2) / w, order)
            for j in range(order + 1):
                out[j][left] = S[j] / w ** j
        right = (x > b1) & (x < b2)
        if np.any(right):
            w = b2 - b1
            S = _smoothstep((b2 - x[right]) / w, order)
            for j in range(order + 1):
                out[j][right] = S[j] * (-1.0 / w) ** j
        return out

    def __call__(self, x):
        return self.derivs(x, 0)[0]

    def describe(self):
        return {"inner": f"{self.inner[0]},{self.inner[1]}", "outer": f"{self.outer[0]},{self.outer[1]}",
                "profile": "quintic smoothstep"}


def bump_rho(inner=D1, outer=D2):
    """The C² cutoff used to localize the graph (see :class:`Bump`)."""
    return Bump(tuple(inner), tuple(outer))


class AssembledFunction:
    """``g = rho * sum_k Q_k`` with two derivatives."""

    def __init__(self, Qs, rho):
        self.Qs = list(Qs)
        self.rho = rho

    def series(self, x, order=2):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        S = np.zeros((order + 1, x.size))
        for Q in self.Qs:
            S += Q.derivs(x, order)
        return S

    def derivs(self, x, order=2):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return _leibniz(self.series(x, order), self.rho.derivs(x, order))

    def __call__(self, x):
        return self.derivs(x, 0)[0]


# ---------------------------------------------------------------------------
# the curve

_H = np.array([  # quintic Hermite basis, coefficients of s^0..s^5
    [1, 0, 0, -10, 15, -6],     # P0
    [0, 1, 0, -6, 8, -3],       # V0
    [0, 0, 0.5, -1.5, 1.5, -0.5],  # A0
    [0, 0, 0, 10, -15, 6],      # P1
    [0, 0, 0, -4, 7, -3],       # V1
    [0, 0, 0, 0.5, -1, 0.5],    # A1
], dtype=np.float64)

#: tangent (in local Hermite units) of the closing arc at its lowest point
ARC_BOTTOM = (1.0, -1.0)
ARC_BOTTOM_VELOCITY = (-2.0, 0.0)


def _hermite(P0, V0, A0, P1, V1, A1):
    data = np.array([P0, V0, A0, P1, V1, A1], dtype=np.float64)  # (6, 2)
    coeffs = _H.T @ data  # (6 powers, 2 coords)
    return [np.polynomial.Polynomial(coeffs[:, c]) for c in range(2)]


class PathologyCurve(ParamCurve):
    """Graph of ``g`` over ``D2`` (``t < 1/2``) closed by two Hermite arcs.

    ``x = 1/3 + 8t/3`` on the graph part, so ``t`` in ``[1/16, 7/16]`` is
    exactly the graph over ``D1``.  The lift is ``(1, s x, s y)`` for the
    embedding scale ``s``.
    """

    n = 2
    breakpoints = (1.0 / 16.0, 7.0 / 16.0, 0.5, 0.75)

    def __init__(self, g, embed_scale=1, directory=None):
        self.g = g
        self.embed_scale = Fraction(embed_scale)
        self.directory = directory
        x0, x1 = float(D2[0]), float(D2[1])
        G0 = g.derivs(np.array([x0, x1]), 2)
        v = 8.0 / 3.0
        start = (x1, G0[0, 1]), (v / 4, G0[1, 1] * v / 4), (0.0, G0[2, 1] * v * v / 16)
        end = (x0, G0[0, 0]), (v / 4, G0[1, 0] * v / 4), (0.0, G0[2, 0] * v * v / 16)
        bottom = ARC_BOTTOM, ARC_BOTTOM_VELOCITY, (0.0, 0.0)
        self._arcs = (_hermite(*start, *bottom), _hermite(*bottom, *end))

    def _planar(self, t, order):
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=np.float64)), 1.0)
        out = np.zeros((order + 1, t.size, 2))
        graph = t < 0.5
        if np.any(graph):
            x = float(D2[0]) + (8.0 / 3.0) * t[graph]
            G = self.g.derivs(x, order)
            out[0, graph, 0] = x
            out[0, graph, 1] = G[0]
            if order >= 1:
                out[1, graph, 0] = 8.0 / 3.0
                out[1, graph, 1] = G[1] * (8.0 / 3.0)
        for i, (lo, arc) in enumerate(((0.5, self._arcs[0]), (0.75, self._arcs[1]))):
            sel = (t >= lo) & (t < lo + 0.25)
            if not np.any(sel):
                continue
            s = 4.0 * (t[sel] - lo)
            for c in range(2):
                poly = arc[c]
                for j in range(order + 1):
                    out[j, sel, c] = poly(s) * 4.0 ** j
                    poly = poly.deriv()
        return out

    def _lift_from(self, P, constant):
        s = float(self.embed_scale)
        return np.column_stack([np.full(P.shape[0], constant), s * P[:, 0], s * P[:, 1]])

    def lift(self, t):
        return self._lift_from(self._planar(t, 0)[0], 1.0)

    def lift_deriv(self, t):
        return self._lift_from(self._planar(t, 1)[1], 0.0)

    def lift_second(self, t):
        return self._lift_from(self._planar(t, 2)[2], 0.0)

    def descriptor(self):
        if self.directory is None:
            raise InvalidArgument("pathology curve has not been written to a directory")
        return {"family": "pathology", "dir": "."}


def _polyline_self_intersects(P):
    """True when the closed polyline through the rows of ``P`` crosses itself."""
    A = P
    B = np.roll(P, -1, axis=0)
    n = A.shape[0]

    def orient(p, q, r):
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                       - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        o1 = orient(A[i], B[i], A[j])
        o2 = orient(A[i], B[i], B[j])
        o3 = orient(A[j], B[j], A[i][None, :])
        o4 = orient(A[j], B[j], B[i][None, :])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return True
    return False


# ---------------------------------------------------------------------------
# stages and the artifact

@dataclass(frozen=True)
class StagePlan:
    """Target counts ``a[0] = a_{d_1}, a[1] = a_{d_2}, ...`` and the number of stages."""

    a: tuple
    K: int
    D1: tuple = D1
    D2: tuple = D2

    def __post_init__(self):
        if self.K < 3:
            raise InvalidArgument("need K >= 3 stages (at least one verifiable stage)")
        if len(self.a) != self.K - 1:
            raise InvalidArgument(f"need {self.K - 1} target counts for K={self.K}")
        if any(int(v) < 1 for v in self.a):
            raise InvalidArgument("target counts must be positive")
        if not (self.D2[0] < self.D1[0] < self.D1[1] < self.D2[1]):
            raise InvalidArgument("D1 must lie strictly inside D2")

    @classmethod
    def from_targets(cls, targets, stages, first_roots=1):
        """``targets`` are the counts required at stages ``2..K-1``."""
        targets = tuple(int(v) for v in targets)
        return cls((int(first_roots),) + targets, int(stages))

    def degrees(self):
        """``d_1, ..., d_K`` from ``d_{k+1} = 2 d_k + a_{d_k}``."""
        d = [1]
        for a in self.a:
            d.append(2 * d[-1] + a)
        return tuple(d)


@dataclass(frozen=True)
class Stage:
    k: int
    Q: ScaledRootPoly
    delta: float
    d: int

    @property
    def q(self):
        return AffinePolynomial.from_roots(self.Q.roots)

    @property
    def c(self):
        return self.Q.scale

    @property
    def roots(self):
        return self.Q.roots


@dataclass
class PathologyCertificate:
    stage: int
    degree: int
    required: int
    verified: int
    min_margin: float
    resolution_stable: bool
    perturbed: bool = False
    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.verified >= self.required and self.min_margin > 0
                    and self.resolution_stable)

    def csv_row(self):
        return {"stage": self.stage, "degree": self.degree, "required": self.required,
                "verified": self.verified, "min_margin": self.min_margin, "pass": self.passed}


def build_stages(plan, grid=NORM_GRID):
    """Run the scale and margin recursion for every stage of ``plan``."""
    degrees = plan.degrees()
    stages = []
    deltas = [FIRST_DELTA]
    for k in range(2, plan.K + 1):
        r = plan.a[k - 2]
        shift = 2 * degrees[k - 2]
        base = ScaledRootPoly(prescribed_roots(r), shift, 0)
        e = choose_scale(base, deltas, k)
        Q = base.with_exponent(e)
        delta = margin_delta(Q, D1, grid=grid)
        stages.append(Stage(k, Q, delta, degrees[k - 1]))
        deltas.append(delta)
    return stages


def _stage_invariants(stages):
    deltas = [FIRST_DELTA]
    for st in stages:
        roots = sorted(st.roots)
        a = len(roots)
        if any(not D1[0] < r < D1[1] for r in roots):
            raise ConstructionFailure(f"stage {st.k}: root outside D1")
        if a > 1 and min(b - c for b, c in zip(roots[1:], roots)) < (D1[1] - D1[0]) / (2 * a):
            raise ConstructionFailure(f"stage {st.k}: roots too close")
        if st.Q.degree != st.d:
            raise ConstructionFailure(f"stage {st.k}: degree bookkeeping mismatch")
        bound = min(deltas) * 2.0 ** (-st.k)
        if c1_norm(st.Q, D1) > bound:
            raise ConstructionFailure(f"stage {st.k}: C1 norm exceeds {bound:.3e}")
        if not st.delta > 0:
            raise ConstructionFailure(f"stage {st.k}: nonpositive margin")
        deltas.append(st.delta)


class PathologyArtifact:
    """Stages, cutoff, assembled function, curve, and the polynomial family."""

    def __init__(self, plan, stages, rho=None, embed_scale=1, perturb_seed=0, directory=None):
        self.plan = plan
        self.stages = list(stages)
        self.rho = rho if rho is not None else bump_rho()
        self.g = AssembledFunction([st.Q for st in self.stages], self.rho)
        self.embed_scale = Fraction(embed_scale)
        self.perturb_seed = int(perturb_seed)
        self.gamma = PathologyCurve(self.g, self.embed_scale, directory)
        self.perturbations = {}
        self.certificates = {}

    @property
    def K(self):
        return self.plan.K

    def stage(self, k):
        return self.stages[k - 2]

    def degree(self, k):
        return 1 if k == 1 else self.stage(k).d

    def required(self, k):
        """Zeros carried by stage ``k``: the root count of ``q_{k+1}``."""
        return self.plan.a[k - 1]

    def P(self, k):
        """``P_k(x, y) = y - sum_{j=2}^k Q_j(x)`` with exact coefficients."""
        coeffs = {(0, 1): Fraction(1)}
        for st in self.stages[:k - 1]:
            for (a,), v in st.Q.to_affine().coeffs.items():
                coeffs[(a, 0)] = coeffs.get((a, 0), 0) - v
        return AffinePolynomial(2, coeffs)

    def hP(self, k):
        """Homogenized ``P_k`` adapted to the embedding scale (no perturbation)."""
        return self._hP_cached(k)

    def _hP_cached(self, k):
        cache = self.__dict__.setdefault("_hp_cache", {})
        if k not in cache:
            base = homogenize(self.P(k), self.degree(k))
            s = self.embed_scale
            terms = {a: v * s ** a[0] for a, v in base.exact.items()}
            cache[k] = HomogeneousPolynomial.from_terms(2, base.d, terms)
        return cache[k]

    def p_hom(self, k):
        """``p_k = hP_k + R_k`` with ``R_k`` the verification perturbation (if any)."""
        base = self.hP(k)
        R = self.perturbations.get(k)
        if R is None:
            return base
        terms = dict(base.exact)
        for a, v in R.exact.items():
            terms[a] = terms.get(a, Fraction(0)) + v
        return HomogeneousPolynomial.from_terms(2, base.d, terms)

    # checks -----------------------------------------------------------------
    def check(self):
        """Stage invariants, curve invariants, and the smallness of ``g``."""
        _stage_invariants(self.stages)
        x = np.linspace(float(D2[0]), float(D2[1]), 8193)
        gmax = float(np.abs(self.g(x)).max())
        if not gmax < 0.5:
            raise ConstructionFailure(f"|g| reaches {gmax:.3g}; the closing arc may cross the graph")
        validate_curve(self.gamma)
        t = np.linspace(0.0, 1.0, 4001)[:-1]
        pts = self.gamma.lift(t)[:, 1:]
        if np.abs(pts).max() >= 10.0:
            raise ConstructionFailure("curve leaves the chart disk")
        if _polyline_self_intersects(pts):
            raise ConstructionFailure("closing arc intersects the graph")
        return True

    def tail_domination(self):
        """``(k, ||sum_{j>=k+2} Q_j||_{C^1(D1)}, min(delta_2..delta_{k+1}))`` per interior stage."""
        rows = []
        for k in range(2, self.K):
            tail = self.stages[k:]  # stages k+2 .. K
            if tail:
                lhs = c1_norm(lambda x, tail=tail: sum(st.Q.derivs(x, 3) for st in tail), D1)
            else:
                lhs = 0.0
            rhs = min(st.delta for st in self.stages[:k])
            rows.append((k, lhs, rhs))
        return rows

    def gamma_length(self):
        from .geometry import fs_length
        return fs_length(self.gamma)


def assemble_gamma(stages, rho=None, *, plan=None, embed_scale=1, check=True):
    """Assemble ``g``, the closed curve and the polynomial family from built stages."""
    if plan is None:
        plan = StagePlan(tuple(len(st.roots) for st in stages), len(stages) + 1)
    art = PathologyArtifact(plan, stages, rho, embed_scale)
    if check:
        art.check()
    return art


def build_pathology(targets, stages, first_roots=1, embed_scale=1, perturb_seed=0,
                    verify=True):
    """Build and (optionally) verify a pathological curve.

    Parameters
    ----------
    targets : sequence of int
        Zero counts required at stages ``2..K-1``.
    stages : int
        Number of stages ``K``.
    first_roots : int
        Root count of ``q_2`` (the count carried by ``P_1 = y``).
    """
    plan = StagePlan.from_targets(targets, stages, first_roots)
    built = build_stages(plan)
    art = PathologyArtifact(plan, built, embed_scale=embed_scale, perturb_seed=perturb_seed)
    art.check()
    if verify:
        for k in range(2, plan.K):
            verify_pathology(art, k)
    return art


# ---------------------------------------------------------------------------
# high-precision evaluation along the graph over D1

class _MpField:
    """``t -> (h, h')`` for ``h(t) = 2^shift p(X(t))`` on the graph over ``D1``.

    Evaluation uses MPFR.  The rounding error of a sum is bounded by the sum
    of the absolute values of its terms times ``ops 2^-prec``; the working
    precision is raised until that bound is below ``2^-40`` of the value.  A
    value that stays at the noise level up to ``MAX_PRECISION`` bits is an
    exact zero (a grid node can sit exactly on a rational root).  The power
    of two ``2^shift`` keeps the returned floats inside the double range;
    zero counts and margins do not depend on it.
    """

    MAX_PRECISION = 4096

    def __init__(self, artifact, p, precision=192, shift=0, extra=None):
        self.art = artifact
        self.extra = extra
        self.terms = [(a, Fraction(v)) for a, v in p.exact.items()]
        self.d = p.d
        self.precision = int(precision)
        self.shift = int(shift)
        self._cache = {}

    def _constants(self, prec):
        if prec not in self._cache:
            with gmpy2.context(gmpy2.get_context(), precision=prec):
                coefs = [(a, gmpy2.mpfr(gmpy2.mpq(v.numerator, v.denominator)))
                         for a, v in self.terms]
                roots = [[gmpy2.mpfr(gmpy2.mpq(r.numerator, r.denominator)) for r in st.roots]
                         for st in self.art.stages]
                s = self.art.embed_scale
                scale = gmpy2.mpfr(gmpy2.mpq(s.numerator, s.denominator))
            self._cache[prec] = coefs, roots, scale
        return self._cache[prec]

    def _eval(self, t, prec):
        """``(h, h')`` and the sums of absolute terms of each, at precision ``prec``."""
        coefs, roots, s = self._constants(prec)
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            v = gmpy2.mpfr(8) / 3
            x = gmpy2.mpfr(1) / 3 + v * gmpy2.mpfr(t)
            y, dy = gmpy2.mpfr(0), gmpy2.mpfr(0)
            for st, rm in zip(self.art.stages, roots):
                a, b = st.Q.derivs_mp(x, rm)
                y += a
                dy += b
            X1, X2 = s * x, s * y
            dX1, dX2 = s * v, s * dy * v
            p1 = [gmpy2.mpfr(1)]
            p2 = [gmpy2.mpfr(1)]
            for _ in range(self.d):
                p1.append(p1[-1] * X1)
                p2.append(p2[-1] * X2)
            h = gmpy2.mpfr(0)
            dh = gmpy2.mpfr(0)
            size = gmpy2.mpfr(0)
            dsize = gmpy2.mpfr(0)
            for (a0, a1, a2), c in coefs:
                term = c * p1[a1] * p2[a2]
                h += term
                size += abs(term)
                if a1:
                    u = c * a1 * p1[a1 - 1] * p2[a2] * dX1
                    dh += u
                    dsize += abs(u)
                if a2:
                    u = c * a2 * p1[a1] * p2[a2 - 1] * dX2
                    dh += u
                    dsize += abs(u)
            sh = self.shift
            return (gmpy2.mul_2exp(h, sh), gmpy2.mul_2exp(dh, sh),
                    gmpy2.mul_2exp(size, sh), gmpy2.mul_2exp(dsize, sh))

    def point(self, t):
        prec = self.precision
        ops = 8 * (len(self.terms) + sum(len(st.roots) + 2 for st in self.art.stages) + self.d)
        while True:
            h, dh, size, dsize = self._eval(t, prec)
            err = gmpy2.mul_2exp(gmpy2.mpfr(ops), -prec)
            ok_h = size * err <= abs(h) * 2.0 ** -40
            ok_d = dsize * err <= abs(dh) * 2.0 ** -40
            if ok_h and ok_d:
                return float(h), float(dh)
            if prec >= self.MAX_PRECISION:
                if ok_d and abs(h) <= size * err:
                    return 0.0, float(dh)
                raise ConstructionFailure(
                    f"precision limit reached while evaluating a stage polynomial at t={t!r}")
            need = prec
            for v, sz, ok in ((h, size, ok_h), (dh, dsize, ok_d)):
                if not ok:
                    gap = 0 if v == 0 else int(gmpy2.log2(sz / abs(v))) + 1
                    need = max(need, gap + 48 + ops.bit_length())
            prec = min(self.MAX_PRECISION, max(2 * prec if need <= prec else need + 32, prec + 64))
            self.precision = max(self.precision, prec)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.array([self.point(float(ti)) for ti in t]).reshape(-1, 2)
        h, dh = out[:, 0], out[:, 1]
        if self.extra is not None:
            # the perturbation is tiny and well conditioned: doubles suffice
            vg = self.extra.value_and_gradient_many(self.art.gamma.lift(t))
            dR = np.einsum("ij,ij->i", vg[:, 1:], self.art.gamma.lift_deriv(t))
            h = h + np.ldexp(vg[:, 0], self.shift)
            dh = dh + np.ldexp(dR, self.shift)
        return h, dh


def _delta_from_samples(t, h, dh):
    """Margin ``delta`` of ``h`` on ``[t[0], t[-1]]`` from samples of ``h`` and ``h'``.

    The second derivative is bounded by twice the finite-difference slope of
    ``h'`` on each cell (and its neighbours).
    """
    width = np.diff(t)
    d2 = np.abs(np.diff(dh)) / width
    d2 = np.maximum(d2, np.maximum(np.append(d2[1:], d2[-1]), np.insert(d2[:-1], 0, d2[0])))
    L2 = 2.0 * d2
    ah, adh = np.abs(h), np.abs(dh)
    L1 = np.maximum(adh[:-1], adh[1:]) + 0.5 * width * L2
    low = np.maximum(0.5 * (ah[:-1] + ah[1:] - width * L1),
                     0.5 * (adh[:-1] + adh[1:] - width * L2))
    if not np.all(low > 0):
        return 0.0
    return float(min(0.5 * low.min(), ah[0], ah[-1]))


def _lift_bounds(curve, d, t):
    """``sup |X|^d`` and ``sup d |X|^{d-1} |X'|`` over the sample parameters."""
    X = np.linalg.norm(curve.lift(t), axis=1)
    dX = np.linalg.norm(curve.lift_deriv(t), axis=1)
    return float((X ** d).max()), float((d * X ** (d - 1) * dX).max())


def _perturbation(art, k, epsilon):
    """Seeded Kostlan polynomial scaled to ``C^1`` size at most ``epsilon`` on the D-portion."""
    d = art.degree(k)
    w = kostlan_weights(3, d)
    xi = trial_generator(art.perturb_seed, k, PERTURB).standard_normal(w.size)
    R = HomogeneousPolynomial(2, d, xi * w)
    t = np.linspace(*D_PORTION, 4097)
    vg = R.value_and_gradient_many(art.gamma.lift(t))
    dR = np.einsum("ij,ij->i", vg[:, 1:], art.gamma.lift_deriv(t))
    norm = float(np.abs(vg[:, 0]).max() + np.abs(dR).max()) * 1.01
    e = math.floor(math.log2(epsilon / norm))
    terms = {tuple(int(v) for v in a): Fraction(float(c)) * Fraction(2) ** e
             for a, c in zip(R.exps, R.coeffs) if c != 0}
    return HomogeneousPolynomial.from_terms(2, d, terms)


def _value_shift(art, k):
    """Power of two bringing ``p_k`` along the graph to order one: ``-exponent(Q_{k+1})``."""
    return -art.stage(k + 1).Q.exponent if k < art.K else 0


def _stage_field(art, k):
    return _MpField(art, art.hP(k), shift=_value_shift(art, k), extra=art.perturbations.get(k))


def _count_on_portion(art, p, k):
    ev = _stage_field(art, k)
    rep = count_zeros_on_curve(p, art.gamma, t_range=D_PORTION, evaluator=ev)
    return rep, ev


def verify_pathology(artifact, k, tangency_threshold=TANGENCY_THRESHOLD):
    """Certify the zero count of ``p_k`` on the graph over ``D1``.

    Returns the :class:`PathologyCertificate` (also stored on the artifact).
    If a margin falls below ``tangency_threshold`` a seeded perturbation
    ``R_k`` well inside the robustness radius is added and the count rerun.
    """
    art = artifact
    if not 2 <= k <= art.K - 1:
        raise InvalidArgument(f"stage {k} is not verifiable (interior stages are 2..{art.K - 1})")
    art.perturbations.pop(k, None)
    p = art.p_hom(k)
    rep, ev = _count_on_portion(art, p, k)
    perturbed = False
    diag = {"counts_by_resolution": rep.counts_by_resolution, "flags": rep.flags}
    if rep.count and rep.min_margin < tangency_threshold:
        t = np.linspace(*D_PORTION, 2049)
        h, dh = ev(t)
        delta_h = _delta_from_samples(t, h, dh)
        slopes = rep.extra["root_slopes"]
        eps = math.ldexp(min(float(slopes.min()), delta_h) / 10.0, -ev.shift)
        if eps > 0:
            art.perturbations[k] = _perturbation(art, k, eps)
            rep, ev = _count_on_portion(art, art.p_hom(k), k)
            perturbed = True
            diag["perturbation_size"] = eps
            diag["delta_h"] = math.ldexp(delta_h, -ev.shift)
    x = float(D2[0]) + (8.0 / 3.0) * rep.locations
    nxt = art.stage(k + 1)
    prescribed = np.array([float(r) for r in nxt.roots])
    if x.size:
        disp = np.abs(x[:, None] - prescribed[None, :]).min(axis=1)
        diag["max_root_displacement"] = float(disp.max())
    diag["displacement_bound"] = float(nxt.delta / nxt.Q.root_slopes().min())
    cert = PathologyCertificate(
        stage=k, degree=art.degree(k), required=art.required(k), verified=rep.count,
        min_margin=float(rep.min_margin) if rep.count else 0.0,
        resolution_stable=rep.resolution_stable, perturbed=perturbed,
        locations=rep.locations, diagnostics=diag)
    art.certificates[k] = cert
    return cert


def rarity_lower_bound(artifact, k, grid=2048):
    """Certified lower bound on ``P{#(Z(p) ∩ Γ) >= a}`` for Kostlan ``p`` of degree ``d_k``.

    Every ``p = lambda (p_k + R)`` with ``||R||_W <= delta_h / K`` keeps the
    zero count of ``p_k`` on the graph over ``D1``; here ``delta_h`` is the
    robustness margin of ``t -> p_k(X(t))`` and ``K`` bounds the ``C^1``
    norm along the curve of a unit Bombieri-norm polynomial.  Those ``p``
    form a double cone of half-angle ``theta`` around ``±p_k`` in the
    Gaussian coordinates, whose probability is ``I_{sin^2 theta}((M-1)/2, 1/2)``.

    Returns
    -------
    dict
        ``delta_h``, ``lift_bound``, ``norm``, ``sin_theta``, ``dimension``,
        ``lower_bound`` (an ``mpmath.mpf``), ``log10_lower_bound``.
    """
    import mpmath

    art = artifact
    cert = art.certificates.get(k) or verify_pathology(art, k)
    p = art.p_hom(k)
    ev = _stage_field(art, k)
    shift = ev.shift
    t = np.linspace(*D_PORTION, grid + 1)
    h, dh = ev(t)
    delta_h = math.ldexp(_delta_from_samples(t, h, dh), -shift)
    a, b = _lift_bounds(art.gamma, p.d, t)
    lift_bound = (a + b) * 1.01
    norm = bombieri_norm(p)
    sin_theta = delta_h / (lift_bound * norm)
    M = math.comb(p.d + 2, 2)
    if not 0 < sin_theta < 1 or cert.verified < art.required(k):
        lb = mpmath.mpf(0)
    else:
        lb = mpmath.betainc((M - 1) / 2, 0.5, 0, mpmath.mpf(sin_theta) ** 2, regularized=True)
    return {"delta_h": delta_h, "lift_bound": lift_bound, "norm": norm,
            "sin_theta": sin_theta, "dimension": M, "lower_bound": lb,
            "log10_lower_bound": float(mpmath.log10(lb)) if lb > 0 else -math.inf}


# ---------------------------------------------------------------------------
# files

STAGES_FILE = "stages.txt"
CURVE_FILE = "curve.txt"
CERT_FILE = "certificate.csv"


def _format_stages(art):
    lines = ["# pathological curve: one line per stage",
             format_key_values({"first_roots": art.plan.a[0],
                                "targets": ",".join(str(v) for v in art.plan.a[1:]),
                                "stages": art.K,
                                "embed_scale": str(art.embed_scale),
                                "perturb_seed": art.perturb_seed}).rstrip("\n"),
             "# k degree shift exponent delta roots"]
    for st in art.stages:
        roots = ",".join(str(r) for r in st.roots)
        lines.append(f"stage {st.k} {st.d} {st.Q.shift} {st.Q.exponent} {st.delta!r} {roots}")
    return "\n".join(lines) + "\n"


def write_artifact(art, out_dir):
    """Write stage polynomials, stage data, curve descriptor, and certificates."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / STAGES_FILE).write_text(_format_stages(art))
    for k in range(2, art.K + 1):
        write_poly(out / f"P_{k}.poly", art.p_hom(k) if k < art.K else art.hP(k))
    (out / CURVE_FILE).write_text(format_key_values({"family": "pathology", "dir": "."}))
    rows = [art.certificates[k].csv_row() for k in sorted(art.certificates)]
    write_csv(out / CERT_FILE, CERTIFICATE_FIELDS, rows)
    art.gamma.directory = out
    return out


def _parse_stages(text):
    header = {}
    stage_rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("stage "):
            parts = line.split()
            if len(parts) != 7:
                raise InvalidArgument(f"malformed stage line: {raw!r}")
            k, d, shift, e = (int(v) for v in parts[1:5])
            roots = tuple(Fraction(v) for v in parts[6].split(","))
            stage_rows.append((k, d, shift, e, float(parts[5]), roots))
        else:
            key, _, value = line.partition("=")
            if not _:
                raise InvalidArgument(f"malformed line: {raw!r}")
            header[key.strip()] = value.strip()
    return header, stage_rows


def load_artifact(path, check=True):
    """Rebuild an artifact from ``stages.txt`` in the directory ``path``.

    Margins are recomputed from the stored roots and scales and compared
    with the stored values; stored polynomial files are compared with the
    rebuilt ones by :func:`verify_directory`.
    """
    path = Path(path)
    header, rows = _parse_stages((path / STAGES_FILE).read_text())
    targets = tuple(int(v) for v in header.get("targets", "").split(",") if v)
    plan = StagePlan.from_targets(targets, int(header["stages"]), int(header.get("first_roots", 1)))
    degrees = plan.degrees()
    stages = []
    for k, d, shift, e, delta_stored, roots in rows:
        if d != degrees[k - 1] or shift != 2 * degrees[k - 2] or len(roots) != plan.a[k - 2]:
            raise InvalidArgument(f"stage {k}: data inconsistent with the degree recursion")
        Q = ScaledRootPoly(roots, shift, e)
        delta = margin_delta(Q, D1)
        if not math.isclose(delta, delta_stored, rel_tol=1e-12):
            raise InvalidArgument(f"stage {k}: stored margin {delta_stored!r} != recomputed {delta!r}")
        stages.append(Stage(k, Q, delta, d))
    if len(stages) != plan.K - 1:
        raise InvalidArgument("stage list does not match the number of stages")
    art = PathologyArtifact(plan, stages, embed_scale=Fraction(header.get("embed_scale", "1")),
                            perturb_seed=int(header.get("perturb_seed", 0)), directory=path)
    if check:
        art.check()
    return art


def verify_directory(path):
    """Recompute certificates for a written artifact and compare with its files.

    Returns ``(artifact, mismatches)`` where ``mismatches`` lists the files
    that differ from the rebuilt content.
    """
    path = Path(path)
    art = load_artifact(path)
    for k in range(2, art.K):
        verify_pathology(art, k)
    mismatches = []
    for k in range(2, art.K + 1):
        stored = read_poly(path / f"P_{k}.poly")
        rebuilt = art.p_hom(k) if k < art.K else art.hP(k)
        if stored.d != rebuilt.d or not np.array_equal(stored.coeffs, rebuilt.coeffs):
            mismatches.append(f"P_{k}.poly")
    cert_path = path / CERT_FILE
    if cert_path.exists():
        from .io import read_csv
        rows = read_csv(cert_path)
        fresh = [art.certificates[k].csv_row() for k in sorted(art.certificates)]
        if len(rows) != len(fresh):
            mismatches.append(CERT_FILE)
        else:
            for old, new in zip(rows, fresh):
                if (int(old["verified"]) != new["verified"]
                        or (old["pass"] == "true") != new["pass"]):
                    mismatches.append(CERT_FILE)
                    break
    return art, mismatches
