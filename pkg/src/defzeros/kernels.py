"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names (``poly_eval``, ``poly_eval_grad``, ``marching_segments``,
``connected_labels``) are bound to the numba versions when numba is importable
and not disabled via ``DEFZEROS_DISABLE_NUMBA``; otherwise to the numpy ones.
Both variants are always importable under their ``*_numba`` / ``*_numpy``
names so they can be cross-checked and benchmarked.

Monomials are given as an ``(M, k)`` integer exponent table plus an ``(M,)``
coefficient vector; points as an ``(N, k)`` array.
"""
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._accel import HAVE_NUMBA, njit

__all__ = [
    "poly_eval",
    "poly_eval_grad",
    "marching_segments",
    "connected_labels",
    "poly_eval_numpy",
    "poly_eval_grad_numpy",
    "marching_segments_numpy",
    "connected_labels_numpy",
]

_CHUNK_ELEMS = 2_000_000


# ---------------------------------------------------------------- evaluation

def _power_table(pts, dmax):
    # same multiplication order as the numba loop, so both backends agree bitwise
    B, k = pts.shape
    pw = np.empty((B, k, dmax + 1))
    pw[:, :, 0] = 1.0
    if dmax > 0:
        pw[:, :, 1:] = np.cumprod(np.repeat(pts[:, :, None], dmax, axis=2), axis=2)
    return pw


def poly_eval_numpy(exps, coeffs, pts):
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    N, k = pts.shape
    M = exps.shape[0]
    out = np.zeros(N)
    if M == 0 or N == 0:
        return out
    dmax = int(exps.max())
    step = max(1, _CHUNK_ELEMS // max(M, 1))
    for start in range(0, N, step):
        pw = _power_table(pts[start:start + step], dmax)
        s = np.zeros(pw.shape[0])
        comp = np.zeros(pw.shape[0])
        for m in range(M):
            term = np.full(pw.shape[0], coeffs[m])
            for i in range(k):
                term = term * pw[:, i, exps[m, i]]
            t = s + term
            big = np.abs(s) >= np.abs(term)
            comp += np.where(big, (s - t) + term, (term - t) + s)
            s = t
        out[start:start + step] = s + comp
    return out


def poly_eval_grad_numpy(exps, coeffs, pts):
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    N, k = pts.shape
    out = np.zeros((N, k + 1))
    if exps.shape[0] == 0 or N == 0:
        return out
    out[:, 0] = poly_eval_numpy(exps, coeffs, pts)
    dmax = int(exps.max())
    step = max(1, _CHUNK_ELEMS // max(exps.shape[0], 1))
    for i in range(k):
        mask = exps[:, i] > 0
        if not mask.any():
            continue
        e = exps[mask].copy()
        c = coeffs[mask] * e[:, i]
        e[:, i] -= 1
        for start in range(0, N, step):
            pw = _power_table(pts[start:start + step], dmax)
            terms = np.repeat(c[None, :], pw.shape[0], axis=0)
            for j in range(k):
                terms = terms * pw[:, j, e[:, j]]
            out[start:start + step, i + 1] = terms.sum(axis=1)
    return out


@njit(cache=True)
def poly_eval_numba(exps, coeffs, pts):
    N, k = pts.shape
    M = exps.shape[0]
    out = np.zeros(N)
    if M == 0:
        return out
    dmax = 0
    for m in range(M):
        for i in range(k):
            if exps[m, i] > dmax:
                dmax = exps[m, i]
    pw = np.empty((k, dmax + 1))
    for p in range(N):
        for i in range(k):
            pw[i, 0] = 1.0
            for e in range(1, dmax + 1):
                pw[i, e] = pw[i, e - 1] * pts[p, i]
        s = 0.0
        comp = 0.0
        for m in range(M):
            term = coeffs[m]
            for i in range(k):
                term = term * pw[i, exps[m, i]]
            t = s + term
            if abs(s) >= abs(term):
                comp += (s - t) + term
            else:
                comp += (term - t) + s
            s = t
        out[p] = s + comp
    return out


@njit(cache=True)
def poly_eval_grad_numba(exps, coeffs, pts):
    N, k = pts.shape
    M = exps.shape[0]
    out = np.zeros((N, k + 1))
    if M == 0:
        return out
    dmax = 0
    for m in range(M):
        for i in range(k):
            if exps[m, i] > dmax:
                dmax = exps[m, i]
    pw = np.empty((k, dmax + 1))
    for p in range(N):
        for i in range(k):
            pw[i, 0] = 1.0
            for e in range(1, dmax + 1):
                pw[i, e] = pw[i, e - 1] * pts[p, i]
        s = 0.0
        comp = 0.0
        for m in range(M):
            c = coeffs[m]
            term = c
            for i in range(k):
                term = term * pw[i, exps[m, i]]
            t = s + term
            if abs(s) >= abs(term):
                comp += (s - t) + term
            else:
                comp += (term - t) + s
            s = t
            for i in range(k):
                ei = exps[m, i]
                if ei == 0:
                    continue
                g = c * ei
                for j in range(k):
                    if j == i:
                        g = g * pw[j, ei - 1]
                    else:
                        g = g * pw[j, exps[m, j]]
                out[p, i + 1] += g
        out[p, 0] = s + comp
    return out


# ----------------------------------------------------------- marching squares

def marching_segments_numpy(vals):
    """Contour segments of the zero level on one ``(N+1, N+1)`` node grid.

    Returns ``(segs, cells)``: ``segs[s] = (edge_a, edge_b)`` in local edge
    numbering (horizontal edge ``(i,j)-(i+1,j)`` is ``i*(N+1)+j``, vertical
    edge ``(i,j)-(i,j+1)`` is ``N*(N+1) + i*N + j``) and ``cells[s] = i*N+j``.
    Saddle cells are split with the mean of the four corners.
    """
    vals = np.asarray(vals, dtype=np.float64)
    N = vals.shape[0] - 1
    pos = vals > 0
    s00 = pos[:-1, :-1]
    s10 = pos[1:, :-1]
    s11 = pos[1:, 1:]
    s01 = pos[:-1, 1:]
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    bottom = ii * (N + 1) + jj
    top = ii * (N + 1) + jj + 1
    left = N * (N + 1) + ii * N + jj
    right = N * (N + 1) + (ii + 1) * N + jj
    cb = s00 != s10
    cr = s10 != s11
    ct = s01 != s11
    cl = s00 != s01
    ncross = cb.astype(int) + cr + ct + cl
    cell = ii * N + jj

    segs = []
    cells = []
    two = ncross == 2
    if two.any():
        edges = np.stack([bottom, right, top, left], axis=-1)[two]
        flags = np.stack([cb, cr, ct, cl], axis=-1)[two]
        order = np.argsort(~flags, axis=1, kind="stable")[:, :2]
        pair = np.take_along_axis(edges, order, axis=1)
        segs.append(pair)
        cells.append(cell[two])
    four = ncross == 4
    if four.any():
        centre = 0.25 * (vals[:-1, :-1] + vals[1:, :-1] + vals[1:, 1:] + vals[:-1, 1:])
        joined = (centre > 0) == s00
        a = four & joined
        b = four & ~joined
        if a.any():
            segs.append(np.stack([bottom[a], right[a]], axis=-1))
            segs.append(np.stack([top[a], left[a]], axis=-1))
            cells += [cell[a], cell[a]]
        if b.any():
            segs.append(np.stack([bottom[b], left[b]], axis=-1))
            segs.append(np.stack([top[b], right[b]], axis=-1))
            cells += [cell[b], cell[b]]
    if not segs:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
    segs = np.concatenate(segs).astype(np.int64)
    cells = np.concatenate(cells).astype(np.int64)
    return _sort_segments(segs, cells)


@njit(cache=True)
def marching_segments_numba(vals):
    N = vals.shape[0] - 1
    segs = np.empty((2 * N * N, 2), dtype=np.int64)
    cells = np.empty(2 * N * N, dtype=np.int64)
    ns = 0
    ed = np.empty(4, dtype=np.int64)
    for i in range(N):
        for j in range(N):
            s00 = vals[i, j] > 0
            s10 = vals[i + 1, j] > 0
            s11 = vals[i + 1, j + 1] > 0
            s01 = vals[i, j + 1] > 0
            bottom = i * (N + 1) + j
            top = i * (N + 1) + j + 1
            left = N * (N + 1) + i * N + j
            right = N * (N + 1) + (i + 1) * N + j
            nc = 0
            if s00 != s10:
                ed[nc] = bottom
                nc += 1
            if s10 != s11:
                ed[nc] = right
                nc += 1
            if s01 != s11:
                ed[nc] = top
                nc += 1
            if s00 != s01:
                ed[nc] = left
                nc += 1
            cid = i * N + j
            if nc == 2:
                segs[ns, 0] = ed[0]
                segs[ns, 1] = ed[1]
                cells[ns] = cid
                ns += 1
            elif nc == 4:
                centre = 0.25 * (vals[i, j] + vals[i + 1, j] + vals[i + 1, j + 1] + vals[i, j + 1])
                if (centre > 0) == s00:
                    segs[ns, 0] = bottom
                    segs[ns, 1] = right
                    segs[ns + 1, 0] = top
                    segs[ns + 1, 1] = left
                else:
                    segs[ns, 0] = bottom
                    segs[ns, 1] = left
                    segs[ns + 1, 0] = top
                    segs[ns + 1, 1] = right
                cells[ns] = cid
                cells[ns + 1] = cid
                ns += 2
    return segs[:ns].copy(), cells[:ns].copy()


def _sort_segments(segs, cells):
    order = np.lexsort((segs[:, 0], cells))
    return segs[order], cells[order]


# ---------------------------------------------------------------- union-find

def connected_labels_numpy(n_items, pairs):
    """Component label per item for the undirected graph given by ``pairs``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if n_items == 0:
        return 0, np.zeros(0, dtype=np.int64)
    g = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n_items, n_items)
    )
    ncomp, labels = connected_components(g, directed=False)
    return int(ncomp), labels.astype(np.int64)


@njit(cache=True)
def _uf_labels(n_items, pairs):
    parent = np.arange(n_items)
    for s in range(pairs.shape[0]):
        a = pairs[s, 0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = pairs[s, 1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    labels = np.empty(n_items, dtype=np.int64)
    remap = -np.ones(n_items, dtype=np.int64)
    ncomp = 0
    for i in range(n_items):
        r = i
        while parent[r] != r:
            r = parent[r]
        if remap[r] < 0:
            remap[r] = ncomp
            ncomp += 1
        labels[i] = remap[r]
    return ncomp, labels


def connected_labels_numba(n_items, pairs):
    pairs = np.ascontiguousarray(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))
    if n_items == 0:
        return 0, np.zeros(0, dtype=np.int64)
    ncomp, labels = _uf_labels(n_items, pairs)
    return int(ncomp), labels


def _marching_numba_sorted(vals):
    segs, cells = marching_segments_numba(np.ascontiguousarray(vals, dtype=np.float64))
    return _sort_segments(segs, cells)


def _as_arrays(func):
    def wrapper(exps, coeffs, pts):
        return func(
            np.ascontiguousarray(exps, dtype=np.int64),
            np.ascontiguousarray(coeffs, dtype=np.float64),
            np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64),
        )

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


if HAVE_NUMBA:
    poly_eval = _as_arrays(poly_eval_numba)
    poly_eval_grad = _as_arrays(poly_eval_grad_numba)
    marching_segments = _marching_numba_sorted
    connected_labels = connected_labels_numba
else:
    poly_eval = poly_eval_numpy
    poly_eval_grad = poly_eval_grad_numpy
    marching_segments = marching_segments_numpy
    connected_labels = connected_labels_numpy
