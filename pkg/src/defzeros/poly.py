"""Dense homogeneous polynomials and the Kostlan ensemble.

A degree-``d`` form in ``n+1`` variables is stored as a coefficient vector
aligned with :func:`multi_indices`, which lists every exponent vector of total
degree ``d`` in lexicographic order (``(d,0,...,0)`` first).  Coefficients are
the full monomial coefficients, so a Kostlan sample stores
``xi_alpha * sqrt(multinomial(d, alpha))``.

Polynomials built from exact data (the pathological construction) may also
carry their coefficients as :class:`fractions.Fraction` objects in ``exact``;
the float vector is then the correctly rounded image of that table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Rational

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .rng import KOSTLAN, trial_generator

_INT63 = (1 << 63) - 1


@lru_cache(maxsize=64)
def multi_indices(nvars, d):
    """All exponent vectors of length ``nvars`` summing to ``d``, lex order."""
    if nvars < 1 or d < 0:
        raise InvalidArgument("need nvars >= 1 and d >= 0")
    if nvars == 1:
        out = np.array([[d]], dtype=np.int64)
    else:
        blocks = []
        for a0 in range(d, -1, -1):
            rest = multi_indices(nvars - 1, d - a0)
            blk = np.empty((rest.shape[0], nvars), dtype=np.int64)
            blk[:, 0] = a0
            blk[:, 1:] = rest
            blocks.append(blk)
        out = np.concatenate(blocks)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _index_of(nvars, d):
    return {tuple(int(v) for v in row): i for i, row in enumerate(multi_indices(nvars, d))}


def multinomial_coeff(d, alpha):
    """``d! / prod(alpha_i!)``; an int while it fits in 63 bits, else a float.

    >>> multinomial_coeff(3, (1, 1, 1))
    6
    """
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha) or sum(alpha) != d:
        raise InvalidArgument(f"multi-index {alpha} does not have total degree {d}")
    value = 1
    remaining = d
    for a in alpha:
        value *= math.comb(remaining, a)
        remaining -= a
    return value if value <= _INT63 else float(value)


@lru_cache(maxsize=64)
def kostlan_weights(nvars, d):
    """``sqrt(multinomial(d, alpha))`` for every row of ``multi_indices``."""
    rows = multi_indices(nvars, d)
    w = np.empty(rows.shape[0])
    for i, row in enumerate(rows):
        value = 1
        remaining = d
        for a in row:
            value *= math.comb(remaining, int(a))
            remaining -= int(a)
        w[i] = math.sqrt(float(value))
    w.setflags(write=False)
    return w


def _power_products(exps, x):
    x = np.asarray(x, dtype=np.float64)
    dmax = int(exps.max()) if exps.size else 0
    pw = np.ones((x.size, dmax + 1))
    for e in range(1, dmax + 1):
        pw[:, e] = pw[:, e - 1] * x
    prod = np.ones(exps.shape[0])
    for i in range(x.size):
        prod = prod * pw[i, exps[:, i]]
    return prod


@dataclass(frozen=True, eq=False)
class HomogeneousPolynomial:
    """A form of degree ``d`` in ``n + 1`` variables ``x_0 .. x_n``."""

    n: int
    d: int
    coeffs: np.ndarray
    exact: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64)
        if c.shape != (multi_indices(self.n + 1, self.d).shape[0],):
            raise InvalidArgument(
                f"coefficient vector of length {c.shape} does not match n={self.n}, d={self.d}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction
    @classmethod
    def zero(cls, n, d):
        return cls(n, d, np.zeros(multi_indices(n + 1, d).shape[0]))

    @classmethod
    def from_terms(cls, n, d, terms, exact=None):
        """Build from ``{alpha: coefficient}``.

        Exact (rational) coefficients are kept in ``exact`` when every value
        is rational, unless ``exact=False``.
        """
        index = _index_of(n + 1, d)
        c = np.zeros(len(index))
        if exact is None:
            exact = bool(terms) and all(isinstance(v, Rational) for v in terms.values())
        ex = {} if exact else None
        for alpha, value in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n + 1 or sum(alpha) != d:
                raise InvalidArgument(f"multi-index {alpha} is not of degree {d} in {n + 1} variables")
            c[index[alpha]] += float(value)
            if ex is not None and value != 0:
                ex[alpha] = ex.get(alpha, Fraction(0)) + Fraction(value)
        if ex is not None:
            ex = {a: v for a, v in ex.items() if v != 0}
            for a, v in ex.items():
                c[index[a]] = float(v)
        return cls(n, d, c, ex)

    @property
    def exps(self):
        return multi_indices(self.n + 1, self.d)

    def coefficient(self, alpha):
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) != self.d or len(alpha) != self.n + 1:
            raise InvalidArgument(f"multi-index {alpha} has the wrong shape or degree")
        return float(self.coeffs[_index_of(self.n + 1, self.d)[alpha]])

    def terms(self):
        """Nonzero ``{alpha: coefficient}``; exact values when available."""
        if self.exact is not None:
            return dict(self.exact)
        return {
            tuple(int(a) for a in row): float(c)
            for row, c in zip(self.exps, self.coeffs)
            if c != 0.0
        }

    @cached_property
    def nonzero(self):
        """``(exps, coeffs)`` restricted to nonzero coefficients (kernel input)."""
        mask = self.coeffs != 0.0
        e = np.ascontiguousarray(self.exps[mask])
        c = np.ascontiguousarray(self.coeffs[mask])
        return e, c

    # -- evaluation
    def _check_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n + 1,):
            raise InvalidArgument(f"expected a point with {self.n + 1} coordinates, got shape {x.shape}")
        return x

    def evaluate(self, x):
        """Value at one point, summed with ``math.fsum``."""
        x = self._check_point(x)
        e, c = self.nonzero
        if c.size == 0:
            return 0.0
        return math.fsum(c * _power_products(e, x))

    __call__ = evaluate

    def evaluate_many(self, pts):
        """Values at an ``(N, n+1)`` array of points (compensated kernel sum)."""
        e, c = self.nonzero
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return kernels.poly_eval(e, c, pts)

    def value_and_gradient_many(self, pts):
        """``(N, n+2)`` array: value in column 0, gradient after."""
        e, c = self.nonzero
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return kernels.poly_eval_grad(e, c, pts)

    @cached_property
    def _blocks(self):
        # split variables into a head and a tail; for each tail degree s the
        # coefficients form a dense (head monomials) x (tail monomials) matrix
        k = self.n + 1
        split = max(1, k // 2)
        head_all = {}
        tail_all = {}
        blocks = {}
        for row, c in zip(self.exps, self.coeffs):
            if c == 0.0:
                continue
            h = tuple(int(a) for a in row[:split])
            t = tuple(int(a) for a in row[split:])
            s = sum(t)
            hi = head_all.setdefault(s, {}).setdefault(h, len(head_all[s]))
            ti = tail_all.setdefault(s, {}).setdefault(t, len(tail_all[s]))
            blocks.setdefault(s, []).append((hi, ti, c))
        out = []
        for s, entries in blocks.items():
            H = np.array(list(head_all[s]), dtype=np.int64).reshape(len(head_all[s]), split)
            T = np.array(list(tail_all[s]), dtype=np.int64).reshape(len(tail_all[s]), k - split)
            C = np.zeros((H.shape[0], T.shape[0]))
            for hi, ti, c in entries:
                C[hi, ti] = c
            out.append((H, T, C))
        return split, out

    def evaluate_grid(self, pts):
        """Fast uncompensated values at many points (blocked matrix products).

        Meant for sign scans on large grids where :meth:`evaluate_many`'s
        compensated loop is too slow.  Accuracy is ordinary floating point.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        N = pts.shape[0]
        split, blocks = self._blocks
        if not blocks:
            return np.zeros(N)
        pw = np.ones((self.n + 1, self.d + 1, N))
        for e in range(1, self.d + 1):
            pw[:, e] = pw[:, e - 1] * pts.T
        out = np.zeros(N)
        for H, T, C in blocks:
            MH = np.ones((H.shape[0], N))
            for i in range(split):
                MH *= pw[i, H[:, i]]
            MT = np.ones((T.shape[0], N))
            for i in range(T.shape[1]):
                MT *= pw[split + i, T[:, i]]
            out += np.einsum("ij,ij->j", MH, C @ MT)
        return out

    def gradient_grid(self, pts):
        """``(N, n+1)`` gradients via :meth:`evaluate_grid` of the partials."""
        return np.column_stack([q.evaluate_grid(pts) for q in self._partials])

    # -- derivatives
    def derivative(self, axis):
        """Exact partial derivative with respect to ``x_axis``."""
        if not 0 <= axis <= self.n:
            raise InvalidArgument(f"axis {axis} out of range")
        if self.d == 0:
            return HomogeneousPolynomial.zero(self.n, 0)
        if self.exact is not None:
            terms = {}
            for alpha, v in self.exact.items():
                if alpha[axis] == 0:
                    continue
                beta = list(alpha)
                beta[axis] -= 1
                terms[tuple(beta)] = v * alpha[axis]
            return HomogeneousPolynomial.from_terms(self.n, self.d - 1, terms, exact=True)
        index = _index_of(self.n + 1, self.d - 1)
        out = np.zeros(len(index))
        e = self.exps
        mask = e[:, axis] > 0
        for row, c in zip(e[mask], self.coeffs[mask]):
            beta = list(int(a) for a in row)
            beta[axis] -= 1
            out[index[tuple(beta)]] += c * row[axis]
        return HomogeneousPolynomial(self.n, self.d - 1, out)

    @cached_property
    def _partials(self):
        return tuple(self.derivative(i) for i in range(self.n + 1))

    @cached_property
    def _second_partials(self):
        return tuple(
            tuple(self._partials[i].derivative(j) for j in range(self.n + 1))
            for i in range(self.n + 1)
        )

    def gradient(self, x):
        x = self._check_point(x)
        return np.array([q.evaluate(x) for q in self._partials])

    def second_derivatives(self, x):
        x = self._check_point(x)
        k = self.n + 1
        H = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                H[i, j] = H[j, i] = self._second_partials[i][j].evaluate(x)
        return H

    # -- arithmetic
    def _combine(self, other, sign):
        if not isinstance(other, HomogeneousPolynomial):
            return NotImplemented
        if (other.n, other.d) != (self.n, self.d):
            raise InvalidArgument("polynomials must share n and d")
        if self.exact is not None and other.exact is not None:
            terms = dict(self.exact)
            for a, v in other.exact.items():
                terms[a] = terms.get(a, Fraction(0)) + sign * v
            return HomogeneousPolynomial.from_terms(self.n, self.d, terms, exact=True)
        return HomogeneousPolynomial(self.n, self.d, self.coeffs + sign * other.coeffs)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        if isinstance(scalar, HomogeneousPolynomial):
            return NotImplemented
        if self.exact is not None and isinstance(scalar, Rational):
            terms = {a: v * scalar for a, v in self.exact.items()}
            return HomogeneousPolynomial.from_terms(self.n, self.d, terms, exact=True)
        return HomogeneousPolynomial(self.n, self.d, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1


@dataclass(frozen=True, eq=False)
class AffinePolynomial:
    """Polynomial in ``m`` affine variables, any total degree.

    ``coeffs`` maps exponent tuples (length ``m``) to numbers; ints and
    Fractions are kept exact under arithmetic.
    """

    m: int
    coeffs: dict

    def __post_init__(self):
        clean = {}
        for alpha, v in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.m or any(a < 0 for a in alpha):
                raise InvalidArgument(f"bad exponent {alpha} for {self.m} variables")
            if v != 0:
                clean[alpha] = clean.get(alpha, 0) + v
        object.__setattr__(self, "coeffs", {a: v for a, v in clean.items() if v != 0})

    @classmethod
    def from_roots(cls, roots):
        """Monic univariate ``prod(x - r)``; exact for rational roots."""
        coeffs = [1]
        for r in roots:
            new = [0] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                new[i + 1] += c
                new[i] -= r * c
            coeffs = new
        return cls(1, {(i,): c for i, c in enumerate(coeffs)})

    @property
    def degree(self):
        return max((sum(a) for a in self.coeffs), default=0)

    def __call__(self, t):
        t = tuple(t) if np.ndim(t) else (t,)
        if len(t) != self.m:
            raise InvalidArgument(f"expected {self.m} coordinates")
        exact = all(isinstance(v, Rational) for v in t)
        vals = []
        for alpha, c in self.coeffs.items():
            term = c
            for ti, a in zip(t, alpha):
                term = term * ti ** a
            vals.append(term)
        if exact:
            return sum(vals, Fraction(0))
        return math.fsum(float(v) for v in vals)

    def derivative(self, axis=0):
        out = {}
        for alpha, c in self.coeffs.items():
            if alpha[axis] == 0:
                continue
            beta = list(alpha)
            beta[axis] -= 1
            out[tuple(beta)] = c * alpha[axis]
        return AffinePolynomial(self.m, out)

    def __add__(self, other):
        if not isinstance(other, AffinePolynomial) or other.m != self.m:
            return NotImplemented
        out = dict(self.coeffs)
        for a, v in other.coeffs.items():
            out[a] = out.get(a, 0) + v
        return AffinePolynomial(self.m, out)

    def __neg__(self):
        return AffinePolynomial(self.m, {a: -v for a, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AffinePolynomial):
            if other.m != self.m:
                raise InvalidArgument("variable counts differ")
            out = {}
            for a, u in self.coeffs.items():
                for b, v in other.coeffs.items():
                    key = tuple(x + y for x, y in zip(a, b))
                    out[key] = out.get(key, 0) + u * v
            return AffinePolynomial(self.m, out)
        return AffinePolynomial(self.m, {a: v * other for a, v in self.coeffs.items()})

    __rmul__ = __mul__


def dehomogenize(p, chart_axis=0):
    """Set ``x_chart_axis = 1``; remaining variables keep their order."""
    if not 0 <= chart_axis <= p.n:
        raise InvalidArgument("chart axis out of range")
    out = {}
    for alpha, v in p.terms().items():
        beta = alpha[:chart_axis] + alpha[chart_axis + 1:]
        out[beta] = out.get(beta, 0) + v
    return AffinePolynomial(p.n, out)


def homogenize(q, d, chart_axis=0):
    """Multiply each monomial by ``x_chart_axis ** (d - |monomial|)``."""
    if d < q.degree:
        raise InvalidArgument(f"target degree {d} is below deg(q) = {q.degree}")
    terms = {}
    for beta, v in q.coeffs.items():
        alpha = beta[:chart_axis] + (d - sum(beta),) + beta[chart_axis:]
        terms[alpha] = terms.get(alpha, 0) + v
    return HomogeneousPolynomial.from_terms(q.m, d, terms)


@dataclass(frozen=True, eq=False)
class KostlanSample:
    poly: HomogeneousPolynomial
    xi: np.ndarray
    seed: int
    trial_index: int


def sample_kostlan(n, d, seed, trial_index=0):
    """Draw a Kostlan polynomial: ``xi_alpha ~ N(0,1)`` scaled by sqrt multinomials.

    Draw ``j`` of the trial's Philox stream is assigned to the ``j``-th
    multi-index in lex order.
    """
    if n < 1 or d < 1:
        raise InvalidArgument("need n >= 1 and d >= 1")
    w = kostlan_weights(n + 1, d)
    xi = trial_generator(seed, trial_index, KOSTLAN).standard_normal(w.size)
    xi.setflags(write=False)
    return KostlanSample(HomogeneousPolynomial(n, d, xi * w), xi, int(seed), int(trial_index))


def kostlan_kernel(x, y, d):
    """``sum_alpha multinomial(d, alpha) x^alpha y^alpha`` (the covariance of p(x), p(y))."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    e = multi_indices(x.size, d)
    w = kostlan_weights(x.size, d)
    return math.fsum(w * w * _power_products(e, x) * _power_products(e, y))


def bombieri_norm(p):
    """Norm in which Kostlan coefficients ``xi`` are isotropic: ``sqrt(sum c^2 / multinomial)``."""
    w = kostlan_weights(p.n + 1, p.d)
    return float(np.sqrt(math.fsum((p.coeffs / w) ** 2)))
