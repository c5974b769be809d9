"""One-dimensional B-spline spaces on [0, 1] with open uniform knots."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre points and weights, one row per knot span."""
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_spans(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class BSplineSpace1D:
    degree: int
    knots: np.ndarray
    quadrature: QuadratureRule = field(repr=False)

    @property
    def n_el(self):
        return len(self.breakpoints) - 1

    @property
    def n(self):
        """Number of basis functions."""
        return len(self.knots) - self.degree - 1

    @property
    def breakpoints(self):
        return np.unique(self.knots)

    def greville(self):
        """Greville abscissae (knot averages) of every basis function."""
        p = self.degree
        if p == 0:
            return 0.5 * (self.knots[:-1] + self.knots[1:])
        return np.array([self.knots[a + 1:a + p + 1].mean() for a in range(self.n)])

    def span_of(self, x):
        """Index of the non-degenerate knot span containing x (right end maps to last span)."""
        if x >= self.knots[self.n]:
            return self.n - 1
        return int(np.searchsorted(self.knots, x, side="right")) - 1


def gauss_rule(breakpoints, npts):
    """Gauss-Legendre rule with `npts` points on every interval between breakpoints."""
    xi, wi = np.polynomial.legendre.leggauss(npts)
    a, b = breakpoints[:-1, None], breakpoints[1:, None]
    half = 0.5 * (b - a)
    return QuadratureRule(points=a + half * (xi[None, :] + 1.0), weights=half * wi[None, :])


def make_uniform_space(p, n_el, quad_points=None):
    """Open uniform B-spline space of degree `p` with `n_el` elements on [0, 1].

    The quadrature defaults to p+1 Gauss points per span, which integrates the
    degree-2p products in the mass matrix exactly.
    """
    if int(p) != p or p < 0:
        raise ValueError(f"degree must be a non-negative integer, got {p}")
    if int(n_el) != n_el or n_el < 1:
        raise ValueError(f"element count must be >= 1, got {n_el}")
    p, n_el = int(p), int(n_el)
    inner = np.linspace(0.0, 1.0, n_el + 1)
    knots = np.concatenate([np.zeros(p), inner, np.ones(p)])
    quad = gauss_rule(inner, quad_points or p + 1)
    return BSplineSpace1D(degree=p, knots=knots, quadrature=quad)


def _basis_funs_ders(span, x, p, U, nd):
    # Cox-de Boor triangle with derivatives up to order nd.
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - U[span + 1 - j]
        right[j] = U[span + j] - x
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nd + 1, p + 1))
    ders[0] = ndu[:, p]
    if nd == 0:
        return ders
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nd + 1):
        ders[k] *= fac
        fac *= p - k
    return ders


def eval_basis(space, x, derivative_order=0):
    """Non-zero basis values (or first derivatives) at x.

    Returns ``(first, values)`` where ``values[i]`` belongs to basis function
    ``first + i``; every other basis function vanishes at x.
    """
    if derivative_order not in (0, 1):
        raise ValueError("derivative_order must be 0 or 1")
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} lies outside [0, 1]")
    p = space.degree
    span = space.span_of(x)
    ders = _basis_funs_ders(span, x, p, space.knots, derivative_order)
    return span - p, ders[derivative_order].copy()


def basis_matrix(space, points, derivative_order=0):
    """Dense collocation matrix C[q, a] = N_a^(k)(points[q])."""
    points = np.asarray(points, dtype=float).ravel()
    C = np.zeros((points.size, space.n))
    for q, x in enumerate(points):
        first, vals = eval_basis(space, x, derivative_order)
        C[q, first:first + space.degree + 1] = vals
    return C


def element_basis(space, derivative_order=0):
    """Basis values at the quadrature points of every span.

    Returns ``(first, vals)`` with ``first[e]`` the first active index on span e
    and ``vals[e, i, q]`` the value of basis ``first[e] + i`` at point q.
    """
    quad = space.quadrature
    p = space.degree
    n_spans, nq = quad.points.shape
    first = np.empty(n_spans, dtype=int)
    vals = np.empty((n_spans, p + 1, nq))
    for e in range(n_spans):
        # interior points: every point of span e shares the same active set
        mid = 0.5 * (quad.points[e, 0] + quad.points[e, -1])
        first[e] = space.span_of(mid) - p
        span = first[e] + p
        for q in range(nq):
            vals[e, :, q] = _basis_funs_ders(span, quad.points[e, q], p, space.knots,
                                             derivative_order)[derivative_order]
    return first, vals
