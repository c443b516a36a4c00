"""Zeros of a polynomial on a curve, and the zero curve of a polynomial on a surface.

Curves
    ``h(t) = p(X(t))`` is scanned on a grid whose spacing in FS arclength is
    at most ``1 / resolution``; every sign change is refined to a root.  When
    the lift is a trigonometric polynomial (circles, projective lines and
    their rotations), ``h`` is one too, of order ``m d``: it is sampled
    exactly at ``2 m d + 2`` points, upsampled by FFT, and refined on its
    Fourier representation.  Otherwise ``h`` is evaluated directly.

Surfaces
    ``p`` is evaluated on the six face grids of a :class:`SurfaceAtlas`;
    marching squares extracts the zero curve, and components are counted by
    union-find over globally keyed grid edges.  Critical points of a height
    function on the zero curve are seeded where
    ``G = h_u F_v - h_v F_u`` changes sign along the traced curve and then
    polished by Newton's method on ``(h, G)``.

Every count is repeated at doubled resolution; a count that changes is
re-checked once more and reported as unstable if it still moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.optimize import brentq

from . import kernels
from .errors import DegenerateInput, InvalidArgument, RefinementFailure
from .geometry import node_keys, projective_distance
from .rng import JITTER, trial_generator

TANGENCY_THRESHOLD = 1e-6
ROOT_DEDUP = 1e-10
JITTER_SIZE = 1e-12
RESIDUAL_TOL = 1e-9

CSV_FIELDS = ("trial_index", "mode", "count", "min_margin", "resolution_stable")


@dataclass
class IntersectionReport:
    """Outcome of one count.

    ``locations`` holds curve parameters (curve mode) or homogeneous lifts
    (surface modes).  ``margins`` are per-location transversality margins.
    ``counts_by_resolution`` lists the count at each grid level tried.
    """

    mode: str
    count: int
    locations: np.ndarray
    margins: np.ndarray
    resolution_stable: bool
    counts_by_resolution: tuple = ()
    near_tangencies: np.ndarray = field(default_factory=lambda: np.zeros(0))
    jittered: int = 0
    flags: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def min_margin(self):
        """Smallest margin over located points (``inf`` when there are none)."""
        return float(self.margins.min()) if self.margins.size else math.inf

    @property
    def near_tangent(self):
        return self.near_tangencies.size > 0

    def csv_row(self, trial_index):
        return {
            "trial_index": int(trial_index),
            "mode": self.mode,
            "count": int(self.count),
            "min_margin": self.min_margin,
            "resolution_stable": bool(self.resolution_stable),
        }


# =================================================================== curves


class _TrigField:
    """``h = p(X(t))`` held as a real trigonometric polynomial over the lift period."""

    def __init__(self, p, curve):
        self.T = curve.lift_period
        self.order = curve.trig_order * p.d
        n0 = 2 * self.order + 2
        s = np.arange(n0) * (self.T / n0)
        X = curve.lift(s)
        e, c = p.nonzero
        zero = curve.zero_coordinates
        if zero:
            keep = ~np.any(e[:, list(zero)] > 0, axis=1)
            e, c = e[keep], c[keep]
        vals = kernels.poly_eval(e, c, X) if c.size else np.zeros(n0)
        self.spec = sfft.rfft(vals)[: self.order + 1]
        self.n0 = n0
        k = np.arange(self.order + 1)
        self.omega = 2.0 * np.pi / self.T
        self.k = k
        w = np.full(self.order + 1, 2.0 / n0)
        w[0] = 1.0 / n0
        self.a = self.spec * w

    def grid(self, N, derivative=True):
        """Values (and derivatives) at ``t = j / N``, ``j = 0..N-1``."""
        M = int(round(N * self.T))
        padded = np.zeros(M // 2 + 1, dtype=complex)
        padded[: self.order + 1] = self.spec
        scale = M / self.n0
        h = sfft.irfft(padded, M)[:N] * scale
        if not derivative:
            return h, None
        dh = sfft.irfft(padded * (1j * self.omega * np.arange(padded.size)), M)[:N] * scale
        return h, dh

    def at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        z = np.exp(1j * self.omega * np.outer(t, self.k))
        h = (z @ self.a).real
        dh = (z @ (self.a * 1j * self.omega * self.k)).real
        return h, dh


class _DirectField:
    def __init__(self, p, curve, evaluator=None):
        self.p = p
        self.curve = curve
        self.evaluator = evaluator

    def at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.evaluator is not None:
            return self.evaluator(t)
        vg = self.p.value_and_gradient_many(self.curve.lift(t))
        dX = self.curve.lift_deriv(t)
        return vg[:, 0], np.einsum("ij,ij->i", vg[:, 1:], dX)

    def grid(self, ts):
        return self.at(ts)


def _fs_max_speed(curve, t_range=None):
    a, b = t_range if t_range is not None else (0.0, 1.0)
    t = np.linspace(a, b, 4097)
    return float(curve.fs_speed(t).max()) * (b - a)


@dataclass
class _Scan:
    roots: np.ndarray
    slopes: np.ndarray
    sup_h: float
    sup_dh: float
    near: np.ndarray
    near_slopes: np.ndarray
    jittered: int

    @property
    def count(self):
        return int(self.roots.size)


def _refine_trig(field, a, b, ha):
    """Vectorized safeguarded Newton inside brackets ``[a, b]``."""
    lo, hi = a.copy(), b.copy()
    slo = np.signbit(ha)
    x = lo + (hi - lo) * ha / (ha - field.at(hi)[0])
    active = np.ones(x.size, dtype=bool)
    for _ in range(80):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        h, dh = field.at(xi)
        same = np.signbit(h) == slo[idx]
        lo[idx] = np.where(same, xi, lo[idx])
        hi[idx] = np.where(same, hi[idx], xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xi - h / dh
        bad = ~np.isfinite(xn) | (xn < lo[idx]) | (xn > hi[idx])
        xn = np.where(bad, 0.5 * (lo[idx] + hi[idx]), xn)
        done = (h == 0.0) | (~bad & (np.abs(xn - xi) < 2e-14)) | (hi[idx] - lo[idx] < 1e-13)
        x[idx] = np.where(h == 0.0, xi, xn)
        active[idx[done]] = False
    return x


def _refine_scalar(field, a, b):
    def f(t):
        return float(field.at(np.array([t]))[0][0])

    out = []
    for lo, hi in zip(a, b):
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            out.append(lo)
        elif fhi == 0.0:
            out.append(hi)
        else:
            out.append(brentq(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200))
    return np.array(out, dtype=np.float64)


def _scan(field, N, *, trig, periodic, t_range, sign_last, jitter_rng, tangency, sup_dh=None):
    if trig:
        ts = np.arange(N) / N
        h, dh = field.grid(N, derivative=sup_dh is None)
    else:
        a, b = t_range if t_range is not None else (0.0, 1.0)
        ts = np.linspace(a, b, N + 1)
        if periodic:
            ts = ts[:-1]
        h, dh = field.grid(ts)
    h = h.copy()
    sup_h = float(np.abs(h).max()) if h.size else 0.0
    if not sup_h > 0:
        raise DegenerateInput("polynomial vanishes identically along the curve")

    jittered = 0
    zero = np.flatnonzero(h == 0.0)
    for _ in range(3):
        if zero.size == 0:
            break
        jittered += zero.size
        eps = JITTER_SIZE * np.where(jitter_rng.random(zero.size) < 0.5, -1.0, 1.0)
        ts[zero] = ts[zero] + eps
        h[zero] = field.at(ts[zero])[0]
        zero = zero[h[zero] == 0.0]
    if sup_dh is None:
        sup_dh = float(np.abs(dh).max())

    if periodic:
        # close the loop: h(1) = sign_last * h(0)
        t_ext = np.append(ts, ts[0] + 1.0)
        h_ext = np.append(h, sign_last * h[0])
    else:
        t_ext, h_ext = ts, h
    idx = np.flatnonzero(np.signbit(h_ext[:-1]) != np.signbit(h_ext[1:]))
    lo, hi = t_ext[idx], t_ext[idx + 1]
    if idx.size:
        if trig:
            roots = _refine_trig(field, lo, hi, h_ext[idx])
        else:
            roots = _refine_scalar(field, lo, hi)
        if periodic:
            roots = np.mod(roots, 1.0)
        roots = np.sort(roots)
        if roots.size > 1:
            keep = np.append(True, np.diff(roots) > ROOT_DEDUP)
            if periodic and roots[-1] - roots[0] > 1.0 - ROOT_DEDUP:
                keep[-1] = False
            roots = roots[keep]
        hr, dhr = field.at(roots)
        bad = np.abs(hr) >= RESIDUAL_TOL * sup_h
        if np.any(bad):
            raise RefinementFailure(
                f"residual {np.abs(hr).max() / sup_h:.3e} (relative) at t={roots[bad][0]!r}"
            )
    else:
        roots = np.zeros(0)
        dhr = np.zeros(0)

    # local minima of |h| without a sign change, well below the sup-norm
    cand = np.flatnonzero(np.abs(h) < tangency * sup_h)
    near = []
    for j in cand:
        if periodic:
            left = h[j - 1] * (sign_last if j == 0 else 1)
            right = h[(j + 1) % h.size] * (sign_last if j == h.size - 1 else 1)
        else:
            left = h[j - 1] if j > 0 else h[j]
            right = h[j + 1] if j < h.size - 1 else h[j]
        if (abs(h[j]) <= abs(left) and abs(h[j]) <= abs(right)
                and np.signbit(left) == np.signbit(h[j]) == np.signbit(right)):
            near.append(ts[j])
    near = np.array(near, dtype=np.float64)
    near_slopes = np.abs(field.at(near)[1]) if near.size else np.zeros(0)
    return _Scan(roots, np.abs(dhr), sup_h, sup_dh, near, near_slopes, jittered)


def count_zeros_on_curve(p, curve, resolution=None, *, evaluator=None, t_range=None,
                         jitter_seed=0, tangency_threshold=TANGENCY_THRESHOLD):
    """Count the zeros of ``p`` on a closed curve in ``RP^2``.

    Parameters
    ----------
    p : HomogeneousPolynomial
    curve : ParamCurve
    resolution : float, optional
        Grid points per unit FS length (default ``32 * p.d``).
    evaluator : callable, optional
        ``t -> (h, dh)`` replacing the built-in evaluation of ``p(X(t))``;
        used for high-precision verification.
    t_range : (float, float), optional
        Restrict the count to a parameter interval (non-periodic scan).
    jitter_seed : int
        Seed for the deterministic jitter applied to exact zeros on grid nodes.

    Returns
    -------
    IntersectionReport
        ``locations`` are the refined parameters ``t``; ``margins`` are
        ``|h'(t)| / sup|h|`` on the final grid.
    """
    if p.n != curve.n:
        raise InvalidArgument(f"polynomial has n={p.n} but the curve lives in RP^{curve.n}")
    res = 32.0 * p.d if resolution is None else float(resolution)
    if not res > 0:
        raise InvalidArgument("resolution must be positive")
    periodic = t_range is None
    trig = evaluator is None and periodic and curve.trig_order is not None
    field_ = _TrigField(p, curve) if trig else _DirectField(p, curve, evaluator)
    base = max(16, int(math.ceil(res * _fs_max_speed(curve, t_range))))
    if trig:
        base = max(base, 4 * field_.order)
        base = sfft.next_fast_len(base, real=True)
        if curve.lift_period != 1.0:
            base += base % 2
    rng = trial_generator(jitter_seed, 0, JITTER)
    sign_last = curve.lift_sign ** p.d

    scans = []
    stable = False
    for level in range(3):
        sc = _scan(field_, base * 2**level, trig=trig, periodic=periodic, t_range=t_range,
                   sign_last=sign_last, jitter_rng=rng, tangency=tangency_threshold,
                   sup_dh=scans[0].sup_dh if scans and trig else None)
        scans.append(sc)
        if level >= 1 and sc.count == scans[-2].count:
            stable = True
            break
    final = scans[-1]
    flags = []
    if not stable:
        flags.append("unstable")
    if final.near.size:
        flags.append("near_tangency")
    report = IntersectionReport(
        mode="curve_zeros",
        count=final.count,
        locations=final.roots,
        margins=final.slopes / final.sup_h,
        resolution_stable=stable,
        counts_by_resolution=tuple(s.count for s in scans),
        near_tangencies=final.near,
        jittered=sum(s.jittered for s in scans),
        flags=tuple(flags),
        extra={"sup_h": final.sup_h, "sup_dh": final.sup_dh,
               "near_slopes": final.near_slopes, "root_slopes": final.slopes},
    )
    return report


def transversality_margin(p, curve, report=None, **kwargs):
    """Scale-free transversality margin of ``Z(p)`` and the curve.

    ``min |h'(t)| / (sup|h| + sup|h'|)`` over located zeros and near-tangent
    grid minima.  Returns ``inf`` when the curve misses ``Z(p)`` entirely.
    """
    if report is None:
        report = count_zeros_on_curve(p, curve, **kwargs)
    scale = report.extra["sup_h"] + report.extra["sup_dh"]
    slopes = np.concatenate([report.extra["root_slopes"], report.extra["near_slopes"]])
    if slopes.size == 0:
        return math.inf
    return float(slopes.min() / scale)


# ================================================================= surfaces


def default_surface_grid(d):
    """Default cells per face side for degree ``d``."""
    return max(32, 4 * d)


class _SurfaceGrid:
    """Node values of ``p`` on all six faces, consistent on shared nodes."""

    def __init__(self, p, surface, N, rng, previous=None):
        self.N = N
        u = np.linspace(-1.0, 1.0, N + 1)
        self.u = u
        U, V = np.meshgrid(u, u, indexing="ij")
        keys = np.stack([node_keys(f, N) for f in range(6)])
        flat = keys.ravel()
        uniq, first, inv = np.unique(flat, return_index=True, return_inverse=True)
        face_of = first // ((N + 1) ** 2)
        local = first % ((N + 1) ** 2)
        uu, vv = U.ravel()[local], V.ravel()[local]
        vals = np.empty(uniq.size)
        todo = np.ones(uniq.size, dtype=bool)
        if previous is not None and previous.N * 2 == N:
            # reuse nodes of the coarser grid (same lattice points, scaled keys)
            old_keys = _rescale_keys(previous.keys_unique, previous.N, N)
            pos = np.searchsorted(uniq, old_keys)
            ok = (pos < uniq.size) & (uniq[np.minimum(pos, uniq.size - 1)] == old_keys)
            vals[pos[ok]] = previous.vals_unique[ok]
            todo[pos[ok]] = False
        for f in range(6):
            sel = np.flatnonzero(todo & (face_of == f))
            if sel.size:
                vals[sel] = p.evaluate_grid(surface.lift(f, uu[sel], vv[sel]))
        self.jittered = 0
        zero = np.flatnonzero(vals == 0.0)
        for _ in range(3):
            if zero.size == 0:
                break
            self.jittered += zero.size
            du = JITTER_SIZE * np.where(rng.random(zero.size) < 0.5, -1.0, 1.0)
            dv = JITTER_SIZE * np.where(rng.random(zero.size) < 0.5, -1.0, 1.0)
            for i, z in enumerate(zero):
                X = surface.lift(face_of[z], uu[z] + du[i], vv[z] + dv[i])
                vals[z] = p.evaluate_many(X)[0]
            zero = zero[vals[zero] == 0.0]
        self.keys_unique = uniq
        self.vals_unique = vals
        self.keys = keys
        self.vals = vals[inv].reshape(6, N + 1, N + 1)
        self.sup_h = float(np.abs(vals).max())
        if not self.sup_h > 0:
            raise DegenerateInput("polynomial vanishes identically on the surface")
        self._segments = None

    def segments(self):
        """Per-face segments plus global edge ids and crossing positions."""
        if self._segments is not None:
            return self._segments
        N = self.N
        nh = N * (N + 1)
        out = []
        for f in range(6):
            segs, cells = kernels.marching_segments(self.vals[f])
            if segs.size == 0:
                continue
            e = segs.ravel()
            horiz = e < nh
            i = np.where(horiz, e // (N + 1), (e - nh) // N)
            j = np.where(horiz, e % (N + 1), (e - nh) % N)
            i2 = np.where(horiz, i + 1, i)
            j2 = np.where(horiz, j, j + 1)
            k1 = self.keys[f, i, j]
            k2 = self.keys[f, i2, j2]
            lo_, hi_ = np.minimum(k1, k2), np.maximum(k1, k2)
            m = (2 * N + 1) ** 3
            gid = lo_ * m + hi_
            v1 = self.vals[f, i, j]
            v2 = self.vals[f, i2, j2]
            s = v1 / (v1 - v2)
            uc = self.u[i] + s * (self.u[i2] - self.u[i])
            vc = self.u[j] + s * (self.u[j2] - self.u[j])
            out.append((f, gid.reshape(-1, 2), uc.reshape(-1, 2), vc.reshape(-1, 2)))
        self._segments = out
        return out

    def components(self):
        segs = self.segments()
        if not segs:
            return 0
        gids = np.concatenate([g for _, g, _, _ in segs])
        uniq, inv = np.unique(gids.ravel(), return_inverse=True)
        ncomp, _ = kernels.connected_labels(uniq.size, inv.reshape(-1, 2))
        return ncomp


def _rescale_keys(keys, N_old, N_new):
    m_old = 2 * N_old + 1
    m_new = 2 * N_new + 1
    q0 = keys // (m_old * m_old) - N_old
    q1 = (keys // m_old) % m_old - N_old
    q2 = keys % m_old - N_old
    r = N_new // N_old
    return (q0 * r + N_new) * m_new * m_new + (q1 * r + N_new) * m_new + (q2 * r + N_new)


def _stable_count(values):
    """Apply the doubling rule to a list of per-level counts (lazy)."""
    counts = []
    for c in values:
        counts.append(c)
        if len(counts) >= 2 and counts[-1] == counts[-2]:
            return counts, True
        if len(counts) == 3:
            break
    return counts, False


def _level(levels, lvl, p, surface, N, rng):
    while len(levels) <= lvl:
        prev = levels[-1] if levels else None
        levels.append(_SurfaceGrid(p, surface, N * 2 ** len(levels), rng, previous=prev))
    return levels[lvl]


def trace_components_on_surface(p, surface, grid=None, *, jitter_seed=0, levels=None):
    """Number of connected components of ``Z(p)`` on a closed surface in ``RP^3``.

    ``levels`` may pass grids already evaluated by another count on the same
    polynomial (see :func:`critical_points_on_surface`).
    """
    if p.n != 3:
        raise InvalidArgument("surface counting needs a polynomial in 4 variables (n=3)")
    N = default_surface_grid(p.d) if grid is None else int(grid)
    rng = trial_generator(jitter_seed, 0, JITTER)
    levels = [] if levels is None else levels
    counts, stable = _stable_count(
        _level(levels, k, p, surface, N, rng).components() for k in range(3)
    )
    used = levels[: len(counts)]
    return IntersectionReport(
        mode="surface_components",
        count=counts[-1],
        locations=np.zeros((0, 4)),
        margins=np.zeros(0),
        resolution_stable=stable,
        counts_by_resolution=tuple(counts),
        jittered=sum(g.jittered for g in used),
        flags=() if stable else ("unstable",),
        extra={"grid": used[-1].N},
    )


class _HeightOnFace:
    """``h = p(X)`` and ``G = h_u F_v - h_v F_u`` with ``F = <c, chart(X)>``."""

    def __init__(self, p, surface, c):
        axis = surface.chart_axis
        if axis is None:
            raise DegenerateInput("surface is not contained in a coordinate chart")
        self.p = p
        self.surface = surface
        self.axis = axis
        self.others = [i for i in range(4) if i != axis]
        self.c = np.asarray(c, dtype=np.float64)

    def __call__(self, face, u, v):
        X, Xu, Xv = self.surface.lift_jac(face, u, v)
        vg = self.p.value_and_gradient_many(X)
        h = vg[:, 0]
        grad = vg[:, 1:]
        hu = np.einsum("ij,ij->i", grad, Xu)
        hv = np.einsum("ij,ij->i", grad, Xv)
        a = self.axis
        Y, Yu, Yv = X[:, self.others], Xu[:, self.others], Xv[:, self.others]
        cY, cYu, cYv = Y @ self.c, Yu @ self.c, Yv @ self.c
        xa, xau, xav = X[:, a], Xu[:, a], Xv[:, a]
        Fu = (cYu * xa - cY * xau) / xa**2
        Fv = (cYv * xa - cY * xav) / xa**2
        return h, hu * Fv - hv * Fu, X


def _newton(fun, face, u, v, scale_h, scale_g, tol=1e-12, maxiter=40):
    """Damped Newton on ``(h, G) = 0`` for a batch of seeds on one face."""
    u = u.astype(np.float64).copy()
    v = v.astype(np.float64).copy()
    eps = 1e-7
    ok = np.zeros(u.size, dtype=bool)
    active = np.ones(u.size, dtype=bool)

    def resid(uu, vv):
        h, g, _ = fun(face, uu, vv)
        return h / scale_h, g / scale_g

    r1, r2 = resid(u, v)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        uu, vv = u[idx], v[idx]
        a1, a2 = resid(uu + eps, vv)
        b1, b2 = resid(uu, vv + eps)
        J11 = (a1 - r1[idx]) / eps
        J21 = (a2 - r2[idx]) / eps
        J12 = (b1 - r1[idx]) / eps
        J22 = (b2 - r2[idx]) / eps
        det = J11 * J22 - J12 * J21
        with np.errstate(divide="ignore", invalid="ignore"):
            du = -(J22 * r1[idx] - J12 * r2[idx]) / det
            dv = -(-J21 * r1[idx] + J11 * r2[idx]) / det
        bad = ~np.isfinite(du) | ~np.isfinite(dv)
        du[bad] = 0.0
        dv[bad] = 0.0
        step = np.hypot(du, dv)
        cap = np.minimum(1.0, 0.05 / np.maximum(step, 1e-300))
        du *= cap
        dv *= cap
        norm0 = np.hypot(r1[idx], r2[idx])
        lam = np.ones(idx.size)
        nu, nv = uu + du, vv + dv
        n1, n2 = resid(nu, nv)
        for _ in range(8):
            worse = np.hypot(n1, n2) > norm0
            if not worse.any():
                break
            lam[worse] *= 0.5
            nu[worse] = uu[worse] + lam[worse] * du[worse]
            nv[worse] = vv[worse] + lam[worse] * dv[worse]
            m1, m2 = resid(nu[worse], nv[worse])
            n1[worse], n2[worse] = m1, m2
        u[idx], v[idx] = nu, nv
        r1[idx], r2[idx] = n1, n2
        conv = (lam * step * cap < tol) & (np.abs(n1) < 1e-10) & (np.abs(n2) < 1e-8)
        out = (np.abs(nu) > 1.5) | (np.abs(nv) > 1.5) | bad
        ok[idx[conv & ~out]] = True
        active[idx[conv | out]] = False
    return u, v, ok


def _critical_points(grid, fun, surface, dedup):
    found = []
    seeds = 0
    failures = 0
    scale_h = grid.sup_h
    for f, _gid, uc, vc in grid.segments():
        _, g, _ = fun(f, uc.ravel(), vc.ravel())
        g = g.reshape(-1, 2)
        flip = np.signbit(g[:, 0]) != np.signbit(g[:, 1])
        if not flip.any():
            continue
        g0, g1 = g[flip, 0], g[flip, 1]
        s = g0 / (g0 - g1)
        u0 = uc[flip, 0] + s * (uc[flip, 1] - uc[flip, 0])
        v0 = vc[flip, 0] + s * (vc[flip, 1] - vc[flip, 0])
        scale_g = max(float(np.abs(g).max()), 1e-300)
        u, v, ok = _newton(fun, f, u0, v0, scale_h, scale_g)
        seeds += u0.size
        failures += int((~ok).sum())
        for uu, vv in zip(u[ok], v[ok]):
            found.append((f, uu, vv))
    pts = []
    where = []
    for f, uu, vv in found:
        X = surface.lift(f, np.array([uu]), np.array([vv]))[0]
        X = X / np.linalg.norm(X)
        if pts and projective_distance(np.array(pts), np.tile(X, (len(pts), 1))).min() < dedup:
            continue
        pts.append(X)
        where.append((f, uu, vv))
    return np.array(pts).reshape(-1, 4), where, seeds, failures


def _crit_margins(fun, surface, where, sup_h):
    """``|grad_(u,v) h| / sup|h|`` at each critical point, in its face coordinates."""
    out = np.empty(len(where))
    for i, (f, u, v) in enumerate(where):
        X, Xu, Xv = surface.lift_jac(f, np.array([u]), np.array([v]))
        grad = fun.p.value_and_gradient_many(X)[0, 1:]
        out[i] = math.hypot(grad @ Xu[0], grad @ Xv[0]) / sup_h
    return out


def critical_points_on_surface(p, surface, f, grid=None, *, jitter_seed=0, dedup=1e-8,
                               with_components=False):
    """Critical points of a height function restricted to ``Z(p)`` on a surface.

    Parameters
    ----------
    p : HomogeneousPolynomial
        Polynomial in four variables.
    surface : SurfaceAtlas
    f : MorseFunctionSpec
        Height direction in chart coordinates.
    grid : int, optional
        Cells per face side (default :func:`default_surface_grid`).
    with_components : bool
        Also count components on the same grids and return both reports.

    Returns
    -------
    IntersectionReport or (IntersectionReport, IntersectionReport)
        ``locations`` are unit-norm lifts of the critical points.
    """
    if p.n != 3:
        raise InvalidArgument("surface counting needs a polynomial in 4 variables (n=3)")
    N = default_surface_grid(p.d) if grid is None else int(grid)
    rng = trial_generator(jitter_seed, 0, JITTER)
    fun = _HeightOnFace(p, surface, f.c)
    levels = []
    results = []

    def counts_per_level():
        for k in range(3):
            g = _level(levels, k, p, surface, N, rng)
            results.append(_critical_points(g, fun, surface, dedup))
            yield results[-1][0].shape[0]

    counts, stable = _stable_count(counts_per_level())
    pts, where, seeds, fails = results[-1]
    final = levels[len(counts) - 1]
    flags = []
    if not stable:
        flags.append("unstable")
    if seeds and fails > 0.05 * seeds:
        flags.append("newton_nonconvergence")
    crit_f = surface.height_critical_points(f.c)
    if crit_f is not None:
        if np.any(np.abs(p.evaluate_many(crit_f)) < 1e-8 * final.sup_h):
            flags.append("degenerate_configuration")
    report = IntersectionReport(
        mode="surface_critical_points",
        count=counts[-1],
        locations=pts,
        margins=_crit_margins(fun, surface, where, final.sup_h),
        resolution_stable=stable,
        counts_by_resolution=tuple(counts),
        jittered=sum(g.jittered for g in levels[: len(counts)]),
        flags=tuple(flags),
        extra={"grid": final.N, "seeds": seeds, "newton_failures": fails},
    )
    if not with_components:
        return report
    comp = trace_components_on_surface(p, surface, N, jitter_seed=jitter_seed, levels=levels)
    return report, comp
