"""Fubini-Study geometry of curves and surfaces in real projective space.

Every curve and surface here is described by a homogeneous lift: a smooth map
``X`` into ``R^{n+1} \\ {0}`` whose projective class traces the object.  Chart
coordinates are recovered by dividing by one homogeneous coordinate, but the
counting code in :mod:`defzeros.intersect` works with the lift directly, so
objects that cross the line at infinity of a chart (projective lines, rotated
curves) need no special handling.

Lengths and areas use the round metric of ``S^n`` pushed to ``RP^n``.  For a
lift ``X`` the squared speed is ``|X'|^2/|X|^2 - (X.X')^2/|X|^4``; on the
standard chart this agrees with the gnomonic metric of :func:`fs_metric_at`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import ChartOverflow, DegenerateInput, InvalidArgument
from .rng import HAAR, trial_generator


def fs_metric_at(t):
    """Fubini-Study metric tensor at chart point ``t`` (gnomonic coordinates).

    Parameters
    ----------
    t : array_like, shape (n,)

    Returns
    -------
    ndarray, shape (n, n)
        ``((1+|t|^2) I - t t^T) / (1+|t|^2)^2``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    s = 1.0 + t @ t
    return (s * np.eye(t.size) - np.outer(t, t)) / (s * s)


def lift_speed(X, dX):
    """FS speed of the projective curve with lift ``X`` (rows) and velocity ``dX``."""
    X = np.atleast_2d(X)
    dX = np.atleast_2d(dX)
    xx = np.einsum("ij,ij->i", X, X)
    xv = np.einsum("ij,ij->i", X, dX)
    vv = np.einsum("ij,ij->i", dX, dX)
    sq = vv / xx - (xv / xx) ** 2
    return np.sqrt(np.maximum(sq, 0.0))


def projective_distance(X, Y):
    """Angle between the lines spanned by ``X`` and ``Y`` (rows), in ``[0, pi/2]``."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    a = X / np.linalg.norm(X, axis=1, keepdims=True)
    b = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    # chord lengths are better conditioned than arccos near 0
    plus = np.linalg.norm(a - b, axis=1)
    minus = np.linalg.norm(a + b, axis=1)
    return 2.0 * np.arcsin(np.minimum(plus, minus) / 2.0)


# ---------------------------------------------------------------- curves


class ParamCurve:
    """Closed curve in ``RP^n`` parametrized by ``t`` in ``[0, 1)``.

    Subclasses implement :meth:`lift` and :meth:`lift_deriv`.  The lift
    satisfies ``X(t + 1) = lift_sign * X(t)``.

    Attributes
    ----------
    n : int
        Dimension of the ambient projective space.
    lift_sign : int
        ``+1`` for a closed lift, ``-1`` when the lift closes only after two
        periods (a projective line).
    trig_order : int or None
        If the lift is a trigonometric polynomial of this order in
        ``2 pi t / T`` with ``T = 1`` (or ``T = 2`` when ``lift_sign = -1``),
        ``p(X(t))`` is a trigonometric polynomial and the fast spectral
        counter in :mod:`defzeros.intersect` applies.
    affine : bool
        True when the curve lies in a single affine chart.
    """

    n = 2
    lift_sign = 1
    trig_order = None
    affine = True
    breakpoints = ()

    def lift(self, t):
        raise NotImplementedError

    def lift_deriv(self, t):
        raise NotImplementedError

    @property
    def lift_period(self):
        return 1.0 if self.lift_sign > 0 else 2.0

    def descriptor(self):
        """``key=value`` mapping describing the curve (see :mod:`defzeros.io`)."""
        raise NotImplementedError

    # derived quantities
    def fs_speed(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return lift_speed(self.lift(t), self.lift_deriv(t))

    @cached_property
    def chart_axis(self):
        """Homogeneous coordinate that never vanishes on the curve, or None."""
        t = np.linspace(0.0, 1.0, 2049)[:-1]
        X = self.lift(t)
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
        worst = np.abs(X).min(axis=0)
        axis = int(np.argmax(worst))
        return axis if worst[axis] > 1e-3 else None

    def point(self, t):
        """Chart coordinates (dividing by :attr:`chart_axis`)."""
        axis = self.chart_axis
        if axis is None:
            raise ChartOverflow("curve does not lie in a single coordinate chart")
        X = self.lift(np.atleast_1d(np.asarray(t, dtype=np.float64)))
        return np.delete(X, axis, axis=1) / X[:, axis:axis + 1]

    @cached_property
    def zero_coordinates(self):
        """Homogeneous coordinates that vanish identically along the lift."""
        t = np.linspace(0.0, 1.0, 257)[:-1] + 0.00123
        X = self.lift(t)
        scale = np.abs(X).max()
        return tuple(int(i) for i in np.flatnonzero(np.abs(X).max(axis=0) <= 1e-15 * scale))


def _as_t(t):
    return np.atleast_1d(np.asarray(t, dtype=np.float64))


class Circle(ParamCurve):
    """Round circle ``center + radius (cos 2 pi t, sin 2 pi t)`` in the chart ``x_0 = 1``."""

    trig_order = 1

    def __init__(self, center=(0.0, 0.0), radius=1.0):
        self.center = np.asarray(center, dtype=np.float64).reshape(2)
        self.radius = float(radius)
        if not self.radius > 0:
            raise DegenerateInput("circle radius must be positive")

    def lift(self, t):
        t = _as_t(t)
        w = 2.0 * np.pi * t
        return np.column_stack([
            np.ones_like(t),
            self.center[0] + self.radius * np.cos(w),
            self.center[1] + self.radius * np.sin(w),
        ])

    def lift_deriv(self, t):
        t = _as_t(t)
        w = 2.0 * np.pi * t
        k = 2.0 * np.pi * self.radius
        return np.column_stack([np.zeros_like(t), -k * np.sin(w), k * np.cos(w)])

    def lift_mp(self, t, ctx):
        w = 2 * ctx.pi * t
        return [ctx.mpf(1), self.center[0] + self.radius * ctx.cos(w),
                self.center[1] + self.radius * ctx.sin(w)]

    def descriptor(self):
        return {"family": "circle", "center": ",".join(repr(float(v)) for v in self.center),
                "radius": repr(self.radius)}


class ProjectiveLine(ParamCurve):
    """The projective line through ``[e_a]`` and ``[e_b]``, traversed once.

    The lift ``cos(pi t) e_a + sin(pi t) e_b`` changes sign over one period.
    With the default axes ``(0, 1)`` this is the line ``x_2 = 0``.
    """

    lift_sign = -1
    trig_order = 1
    affine = False

    def __init__(self, axes=(0, 1), n=2):
        self.n = int(n)
        self.axes = tuple(int(a) for a in axes)
        if len(set(self.axes)) != 2 or not all(0 <= a <= self.n for a in self.axes):
            raise InvalidArgument("axes must be two distinct coordinate indices")

    def lift(self, t):
        t = _as_t(t)
        X = np.zeros((t.size, self.n + 1))
        X[:, self.axes[0]] = np.cos(np.pi * t)
        X[:, self.axes[1]] = np.sin(np.pi * t)
        return X

    def lift_deriv(self, t):
        t = _as_t(t)
        X = np.zeros((t.size, self.n + 1))
        X[:, self.axes[0]] = -np.pi * np.sin(np.pi * t)
        X[:, self.axes[1]] = np.pi * np.cos(np.pi * t)
        return X

    def descriptor(self):
        return {"family": "projective_line", "axes": f"{self.axes[0]},{self.axes[1]}"}


class SampledCurve(ParamCurve):
    """Closed chart curve interpolated by a periodic cubic spline (C^2).

    Parameters
    ----------
    t : array_like
        Increasing parameter values; rescaled to ``[0, 1]``.
    points : array_like, shape (N, 2)
        Chart coordinates.  If the last point differs from the first, the
        curve is closed by appending the first point at ``t = 1``.
    """

    def __init__(self, t, points):
        t = np.asarray(t, dtype=np.float64)
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] != t.size or pts.shape[0] < 4:
            raise InvalidArgument("need at least 4 samples with matching t values")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgument("t values must be strictly increasing")
        if np.linalg.norm(pts[-1] - pts[0]) > 1e-12 * max(1.0, np.abs(pts).max()):
            step = np.mean(np.diff(t))
            t = np.append(t, t[-1] + step)
            pts = np.vstack([pts, pts[:1]])
        else:
            pts = pts.copy()
            pts[-1] = pts[0]
        self.n = pts.shape[1]
        self._t = (t - t[0]) / (t[-1] - t[0])
        self._pts = pts
        self._spline = CubicSpline(self._t, pts, bc_type="periodic")
        self._dspline = self._spline.derivative()
        self.breakpoints = tuple(self._t[1:-1])

    def lift(self, t):
        t = np.mod(_as_t(t), 1.0)
        return np.column_stack([np.ones_like(t), self._spline(t)])

    def lift_deriv(self, t):
        t = np.mod(_as_t(t), 1.0)
        return np.column_stack([np.zeros_like(t), self._dspline(t)])

    def descriptor(self):
        return {"family": "sampled"}

    @property
    def samples(self):
        return self._t, self._pts


class RotatedCurve(ParamCurve):
    """The image ``[R X(t)]`` of a curve under an orthogonal map of ``R^{n+1}``."""

    def __init__(self, base, R):
        R = np.asarray(R, dtype=np.float64)
        if R.shape != (base.n + 1, base.n + 1):
            raise InvalidArgument("rotation has the wrong size")
        self.base = base
        self.R = R
        self.n = base.n
        self.lift_sign = base.lift_sign
        self.trig_order = base.trig_order
        self.breakpoints = base.breakpoints
        self.affine = base.affine and self.chart_axis is not None

    def lift(self, t):
        return self.base.lift(t) @ self.R.T

    def lift_deriv(self, t):
        return self.base.lift_deriv(t) @ self.R.T

    def descriptor(self):
        out = dict(self.base.descriptor())
        out["rotation"] = ",".join(repr(float(v)) for v in self.R.ravel())
        return out


def validate_curve(curve, samples=10_000, seam_tol=1e-9):
    """Check closure, seam matching, and immersion; raise DegenerateInput on failure."""
    s = curve.lift_sign
    X0, X1 = curve.lift(np.array([0.0, 1.0]))
    V0, V1 = curve.lift_deriv(np.array([0.0, 1.0]))
    scale = max(1.0, np.abs(X0).max())
    if np.abs(X1 - s * X0).max() > seam_tol * scale:
        raise DegenerateInput("curve is not closed: X(1) != X(0)")
    if np.abs(V1 - s * V0).max() > seam_tol * max(1.0, np.abs(V0).max()):
        raise DegenerateInput("derivative mismatch at the seam")
    t = (np.arange(samples) + 0.5) / samples
    speed = curve.fs_speed(t)
    if not np.all(speed > 0) or not np.all(np.isfinite(speed)):
        raise DegenerateInput("curve is not immersed (zero speed on the check grid)")
    return True


def fs_length(curve, rtol=1e-8):
    """FS length of a closed curve by adaptive quadrature of the speed."""
    t = np.linspace(0.0, 1.0, 4097)
    sp = curve.fs_speed(t)
    if not np.all(sp > 0):
        raise DegenerateInput("curve is not immersed")
    breaks = sorted(set(float(b) for b in curve.breakpoints if 0.0 < b < 1.0))
    edges = [0.0, *breaks, 1.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda x: float(curve.fs_speed(x)[0]), a, b,
                                epsabs=0.0, epsrel=rtol * 1e-2, limit=400)
        total += val
    return total


def chart_curve_length(curve, rtol=1e-8):
    """FS length computed with the chart metric tensor (cross-check of :func:`fs_length`)."""
    def speed(x):
        X = curve.lift(x)[0]
        V = curve.lift_deriv(x)[0]
        p = X[1:] / X[0]
        dp = (V[1:] * X[0] - X[1:] * V[0]) / X[0] ** 2
        return math.sqrt(dp @ fs_metric_at(p) @ dp)

    breaks = sorted(set(float(b) for b in curve.breakpoints if 0.0 < b < 1.0))
    edges = [0.0, *breaks, 1.0]
    return sum(integrate.quad(speed, a, b, epsabs=0.0, epsrel=rtol * 1e-2, limit=400)[0]
               for a, b in zip(edges[:-1], edges[1:]))


# -------------------------------------------------------------- surfaces

# faces of the gnomonic cube: (normal axis a, sign s, tangent axes b < c)
FACES = tuple((a, s, *[i for i in range(3) if i != a]) for a in range(3) for s in (1, -1))


class SurfaceAtlas:
    """Closed surface in ``RP^3`` covered by six gnomonic cube-face charts.

    Face ``f`` maps ``(u, v)`` in ``[-1, 1]^2`` to a homogeneous lift.  Node
    ``(i, j)`` of an ``N x N`` face grid sits at the integer cube point with
    coordinate ``s N`` on the face normal and ``2i - N``, ``2j - N`` on the
    tangent axes, so nodes shared by neighbouring faces get identical keys
    (see :func:`node_keys`) and face adjacency needs no separate table.
    """

    n = 3
    affine = True

    def lift(self, face, u, v):
        raise NotImplementedError

    def lift_jac(self, face, u, v):
        """``(X, X_u, X_v)`` each of shape ``(N, 4)``."""
        raise NotImplementedError

    def descriptor(self):
        raise NotImplementedError

    def height_critical_points(self, c):
        """Lifts of the critical points of ``x -> <c, x>`` on the surface, if known."""
        return None

    @cached_property
    def chart_axis(self):
        worst = np.inf * np.ones(4)
        u = np.linspace(-1, 1, 33)
        U, V = np.meshgrid(u, u, indexing="ij")
        for f in range(6):
            X = self.lift(f, U.ravel(), V.ravel())
            X = X / np.linalg.norm(X, axis=1, keepdims=True)
            worst = np.minimum(worst, np.abs(X).min(axis=0))
        axis = int(np.argmax(worst))
        return axis if worst[axis] > 1e-3 else None

    def face_map(self, face, u, v):
        """Chart coordinates of face points (dividing by :attr:`chart_axis`)."""
        axis = self.chart_axis
        if axis is None:
            raise ChartOverflow("surface does not lie in a single coordinate chart")
        X = self.lift(face, _as_t(u), _as_t(v))
        return np.delete(X, axis, axis=1) / X[:, axis:axis + 1]


def cube_point(face, u, v):
    a, s, b, c = FACES[face]
    q = np.zeros((np.size(u), 3))
    q[:, a] = s
    q[:, b] = u
    q[:, c] = v
    return q


def node_keys(face, N):
    """Global integer keys for the ``(N+1)^2`` nodes of a face grid, shape ``(N+1, N+1)``."""
    a, s, b, c = FACES[face]
    i = np.arange(N + 1)
    I, J = np.meshgrid(i, i, indexing="ij")
    q = np.zeros((3, N + 1, N + 1), dtype=np.int64)
    q[a] = s * N
    q[b] = 2 * I - N
    q[c] = 2 * J - N
    m = 2 * N + 1
    return (q[0] + N) * m * m + (q[1] + N) * m + (q[2] + N)


class Ellipsoid(SurfaceAtlas):
    """Ellipsoid ``center + A w``, ``|w| = 1``, in the chart ``x_0 = 1``.

    ``A`` may be given as a 3x3 matrix or as three radii.  The unit sphere is
    ``Ellipsoid()``.
    """

    def __init__(self, center=(0.0, 0.0, 0.0), A=(1.0, 1.0, 1.0)):
        self.center = np.asarray(center, dtype=np.float64).reshape(3)
        A = np.asarray(A, dtype=np.float64)
        self.A = np.diag(A) if A.ndim == 1 else A.reshape(3, 3)
        if abs(np.linalg.det(self.A)) < 1e-12:
            raise DegenerateInput("ellipsoid matrix is singular")

    def _sphere(self, face, u, v):
        q = cube_point(face, u, v)
        r = np.linalg.norm(q, axis=1)
        return q, r

    def lift(self, face, u, v):
        u, v = _as_t(u), _as_t(v)
        q, r = self._sphere(face, u, v)
        x = self.center + (q / r[:, None]) @ self.A.T
        return np.column_stack([np.ones(u.size), x])

    def lift_jac(self, face, u, v):
        u, v = _as_t(u), _as_t(v)
        a, s, b, c = FACES[face]
        q, r = self._sphere(face, u, v)
        w = q / r[:, None]
        eb = np.zeros(3)
        eb[b] = 1.0
        ec = np.zeros(3)
        ec[c] = 1.0
        wu = (eb[None, :] - w * w[:, b:b + 1]) / r[:, None]
        wv = (ec[None, :] - w * w[:, c:c + 1]) / r[:, None]
        zero = np.zeros((u.size, 1))
        X = np.column_stack([np.ones(u.size), self.center + w @ self.A.T])
        return X, np.hstack([zero, wu @ self.A.T]), np.hstack([zero, wv @ self.A.T])

    def second_derivatives(self, face, u, v):
        """Chart-space ``(x_uu, x_uv, x_vv)``, each of shape ``(N, 3)``."""
        u, v = _as_t(u), _as_t(v)
        a, s, b, c = FACES[face]
        q, r = self._sphere(face, u, v)
        r = r[:, None]
        qb, qc = q[:, b:b + 1], q[:, c:c + 1]
        eb = np.zeros(3)
        eb[b] = 1.0
        ec = np.zeros(3)
        ec[c] = 1.0
        wuu = -2 * eb * qb / r**3 - q / r**3 + 3 * q * qb**2 / r**5
        wvv = -2 * ec * qc / r**3 - q / r**3 + 3 * q * qc**2 / r**5
        wuv = -(eb * qc + ec * qb) / r**3 + 3 * q * qb * qc / r**5
        return wuu @ self.A.T, wuv @ self.A.T, wvv @ self.A.T

    def height_critical_points(self, c):
        g = self.A.T @ np.asarray(c, dtype=np.float64)
        w = g / np.linalg.norm(g)
        pts = [self.center + self.A @ w, self.center - self.A @ w]
        return np.array([[1.0, *p] for p in pts])

    def descriptor(self):
        return {"family": "ellipsoid",
                "center": ",".join(repr(float(v)) for v in self.center),
                "matrix": ",".join(repr(float(v)) for v in self.A.ravel())}


class RotatedSurface(SurfaceAtlas):
    """Image of a surface under an orthogonal map of ``R^4``."""

    def __init__(self, base, R):
        R = np.asarray(R, dtype=np.float64)
        if R.shape != (4, 4):
            raise InvalidArgument("rotation must be 4x4")
        self.base = base
        self.R = R

    def lift(self, face, u, v):
        return self.base.lift(face, u, v) @ self.R.T

    def lift_jac(self, face, u, v):
        X, Xu, Xv = self.base.lift_jac(face, u, v)
        return X @ self.R.T, Xu @ self.R.T, Xv @ self.R.T

    def descriptor(self):
        out = dict(self.base.descriptor())
        out["rotation"] = ",".join(repr(float(v)) for v in self.R.ravel())
        return out


def validate_surface(surface, N=32, tol=1e-9):
    """Check immersion on each face grid and agreement of shared edge nodes."""
    u = np.linspace(-1.0, 1.0, N + 1)
    U, V = np.meshgrid(u, u, indexing="ij")
    seen = {}
    for f in range(6):
        X, Xu, Xv = surface.lift_jac(f, U.ravel(), V.ravel())
        Xn = X / np.linalg.norm(X, axis=1, keepdims=True)
        for k, x in zip(node_keys(f, N).ravel(), Xn):
            if k in seen:
                if np.abs(seen[k] - x).max() > tol:
                    raise DegenerateInput(f"faces disagree at shared node on face {f}")
            else:
                seen[k] = x
        J = np.stack([Xu, Xv], axis=2)
        sv = np.linalg.svd(J, compute_uv=False)[:, -1]
        if np.any(sv <= 1e-6):
            raise DegenerateInput(f"surface is not immersed on face {f}")
    return True


def _area_density(surface, face, U, V):
    X, Xu, Xv = surface.lift_jac(face, U, V)
    xx = np.einsum("ij,ij->i", X, X)

    def proj(A, B):
        return (np.einsum("ij,ij->i", A, B)
                - np.einsum("ij,ij->i", X, A) * np.einsum("ij,ij->i", X, B) / xx) / xx

    E, F, G = proj(Xu, Xu), proj(Xu, Xv), proj(Xv, Xv)
    return np.sqrt(np.maximum(E * G - F * F, 0.0))


def fs_area(surface, rtol=1e-6, start=8, max_nodes=512):
    """FS area by tensor Gauss-Legendre quadrature per face, doubled until converged.

    Faces meet only along edges, so every point belongs to exactly one face up
    to a null set and the face integrals add without overlap.
    """
    prev = None
    m = start
    while m <= max_nodes:
        x, w = np.polynomial.legendre.leggauss(m)
        U, V = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w).ravel()
        total = 0.0
        for f in range(6):
            dens = _area_density(surface, f, U.ravel(), V.ravel())
            if not np.all(dens > 0):
                raise DegenerateInput(f"degenerate immersion on face {f}")
            total += float(dens @ W)
        if prev is not None and abs(total - prev) <= 0.01 * rtol * abs(total):
            return total
        prev = total
        m *= 2
    return prev


def latitude_band_area(center_dist, radius, bands=20000):
    """Independent FS area of a round chart sphere via its sphere lift.

    The chart sphere ``|x - (0,0,h)| = r`` is swept by circles ``z = const``;
    each band's lift area is summed with the midpoint rule.  Used only as a
    cross-check of :func:`fs_area`.
    """
    th = (np.arange(bands) + 0.5) * np.pi / bands
    z = center_dist + radius * np.cos(th)
    rho = radius * np.sin(th)
    s = 1.0 + z**2 + rho**2
    # FS metric on the meridian tangent (0, drho, dz) and on the azimuth
    dz = -radius * np.sin(th)
    drho = radius * np.cos(th)
    t = np.stack([np.zeros_like(z), rho, z], axis=1)
    dt = np.stack([np.zeros_like(z), drho, dz], axis=1)
    g_mer = ((s * np.einsum("ij,ij->i", dt, dt)) - np.einsum("ij,ij->i", t, dt) ** 2) / s**2
    g_azi = rho**2 / s  # the azimuthal direction is orthogonal to t
    return float(np.sum(2 * np.pi * np.sqrt(g_mer * g_azi)) * np.pi / bands)


# ----------------------------------------------------------- rotations


def haar_rotation(n, seed, trial_index=0):
    """Haar-distributed element of ``O(n+1)`` (QR of a Gaussian matrix, signs fixed)."""
    rng = trial_generator(seed, trial_index, HAAR)
    Z = rng.standard_normal((n + 1, n + 1))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def rotate(obj, R):
    """Apply the projective map induced by ``R`` to a curve or surface.

    Raises
    ------
    ChartOverflow
        If an affine object is carried off every coordinate chart.
    """
    if isinstance(obj, ParamCurve):
        out = RotatedCurve(obj, R)
        if obj.affine and out.chart_axis is None:
            raise ChartOverflow("rotated curve meets every coordinate hyperplane")
        return out
    if isinstance(obj, SurfaceAtlas):
        out = RotatedSurface(obj, R)
        if out.chart_axis is None:
            raise ChartOverflow("rotated surface meets every coordinate hyperplane")
        return out
    raise InvalidArgument(f"cannot rotate {type(obj).__name__}")


@dataclass(frozen=True)
class MorseFunctionSpec:
    """Height function ``x -> <c, x>`` in chart coordinates; ``c`` is a unit vector."""

    c: tuple

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        norm = np.linalg.norm(c)
        if not abs(norm - 1.0) < 1e-12:
            raise InvalidArgument(f"direction must be a unit vector, |c| = {norm}")
        object.__setattr__(self, "c", tuple(float(v) for v in c))


# ------------------------------------------------------------ descriptors


def _floats(s):
    return [float(v) for v in str(s).split(",")]


def curve_from_descriptor(desc, base_dir=None):
    """Build a curve from a ``key=value`` mapping (keys may carry a ``gamma.`` prefix)."""
    d = {k.split(".", 1)[1] if k.startswith("gamma.") else k: v for k, v in desc.items()}
    fam = d.get("family")
    if fam == "circle":
        curve = Circle(_floats(d.get("center", "0,0")), float(d.get("radius", 1.0)))
    elif fam == "projective_line":
        curve = ProjectiveLine(tuple(int(v) for v in d.get("axes", "0,1").split(",")))
    elif fam == "sampled":
        from pathlib import Path

        from .io import read_sample_table
        path = Path(d["file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        t, pts = read_sample_table(path)
        curve = SampledCurve(t, pts)
    elif fam == "pathology":
        from pathlib import Path

        from .pathology import load_artifact
        path = Path(d["dir"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        curve = load_artifact(path).gamma
    else:
        raise InvalidArgument(f"unknown curve family {fam!r}")
    if "rotation" in d:
        curve = RotatedCurve(curve, np.array(_floats(d["rotation"])).reshape(curve.n + 1, -1))
    return curve


def surface_from_descriptor(desc):
    d = {k.split(".", 1)[1] if k.startswith("gamma.") else k: v for k, v in desc.items()}
    fam = d.get("family")
    if fam in ("sphere", "ellipsoid"):
        center = _floats(d.get("center", "0,0,0"))
        if "matrix" in d:
            A = np.array(_floats(d["matrix"])).reshape(3, 3)
        elif "radii" in d:
            A = _floats(d["radii"])
        else:
            A = [float(d.get("radius", 1.0))] * 3
        surf = Ellipsoid(center, A)
    else:
        raise InvalidArgument(f"unknown surface family {fam!r}")
    if "rotation" in d:
        surf = RotatedSurface(surf, np.array(_floats(d["rotation"])).reshape(4, 4))
    return surf
