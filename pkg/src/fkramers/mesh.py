"""Uniform tensor meshes on the unit square, modal Legendre bases, Gauss rules.

The 1D building block is the Legendre family normalized to be orthonormal on
the reference interval [-1, 1].  Scaled to a mesh cell of width h by the
factor sqrt(2/h) it stays orthonormal in L2 of the cell, so element mass
matrices are exactly the identity and the global L2 norm of a discrete field
is the Euclidean norm of its coefficient vector.

All types here are immutable after construction and safe to share read-only
between concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral

import numpy as np

from .errors import InvalidResolution, PreconditionError

#: Largest supported Gauss-Legendre point count.
MAX_QUAD_POINTS = 32


def _legendre_raw(max_degree, xi):
    """Unnormalized Legendre values P_0..P_max at the points xi, shape (m, npts)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    table = np.empty((max_degree + 1, xi.size))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = xi
    for n in range(2, max_degree + 1):
        table[n] = ((2 * n - 1) * xi * table[n - 1] - (n - 1) * table[n - 2]) / n
    return table


def _legendre_raw_deriv(max_degree, xi):
    """Unnormalized derivatives P_0'..P_max' at xi, shape (m, npts).

    Uses P'_{n} = P'_{n-2} + (2n - 1) P_{n-1}, which is stable up to and
    including the endpoints xi = +-1.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    raw = _legendre_raw(max_degree, xi)
    deriv = np.zeros_like(raw)
    if max_degree >= 1:
        deriv[1] = 1.0
    for n in range(2, max_degree + 1):
        deriv[n] = deriv[n - 2] + (2 * n - 1) * raw[n - 1]
    return deriv


def _scale(max_degree):
    return np.sqrt(np.arange(max_degree + 1) + 0.5)


def legendre_table(max_degree, xi):
    """Orthonormal Legendre values, rows = degrees 0..max_degree, cols = points."""
    return _legendre_raw(max_degree, xi) * _scale(max_degree)[:, None]


def legendre_deriv_table(max_degree, xi):
    """Derivatives of the orthonormal Legendre polynomials, same layout."""
    return _legendre_raw_deriv(max_degree, xi) * _scale(max_degree)[:, None]


def legendre_eval(degree, xi):
    """Evaluate the orthonormal Legendre polynomial of the given degree.

    The family is orthonormal in L2(-1, 1); degree 0 is the constant
    1/sqrt(2).  Accepts a scalar or an array of reference coordinates.
    """
    if not isinstance(degree, Integral) or degree < 0:
        raise PreconditionError("degree must be a nonnegative integer, got %r" % (degree,))
    arr = np.asarray(xi, dtype=float)
    assert np.all(np.abs(arr) <= 1.0 + 1e-12), "reference coordinate outside [-1, 1]"
    values = legendre_table(int(degree), arr.ravel())[int(degree)]
    if arr.ndim == 0:
        return float(values[0])
    return values.reshape(arr.shape)


@dataclass(frozen=True)
class Basis:
    """Tensor modal basis of degree `degree` per direction on each cell."""

    degree: int

    def __post_init__(self):
        if not isinstance(self.degree, Integral) or self.degree < 1:
            raise PreconditionError("basis degree must be an integer >= 1, got %r" % (self.degree,))

    @property
    def nmodes(self):
        return self.degree + 1

    def eval_table(self, xi):
        """Values of all modes at reference points, shape (nmodes, npts)."""
        return legendre_table(self.degree, xi)

    def deriv_table(self, xi):
        return legendre_deriv_table(self.degree, xi)

    def left_values(self):
        """Mode values at the reference left endpoint xi = -1."""
        return self.eval_table(np.array([-1.0]))[:, 0]

    def right_values(self):
        return self.eval_table(np.array([1.0]))[:, 0]


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """Uniform N x N tensor mesh of the open unit square."""

    n: int
    h: float
    nodes: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def build_mesh(n):
    """Uniform mesh with n cells per direction; h = 1/n."""
    if not isinstance(n, Integral) or n < 1:
        raise InvalidResolution("mesh resolution must be a positive integer, got %r" % (n,))
    n = int(n)
    nodes = np.linspace(0.0, 1.0, n + 1)
    return Mesh2D(n=n, h=1.0 / n, nodes=nodes)


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Gauss-Legendre rule on [-1, 1]; weights sum to 2."""

    q: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(q):
    """Gauss-Legendre rule with q points, exact for polynomials of degree 2q - 1."""
    if not isinstance(q, Integral) or q < 1 or q > MAX_QUAD_POINTS:
        raise PreconditionError(
            "quadrature point count must be an integer in [1, %d], got %r" % (MAX_QUAD_POINTS, q)
        )
    nodes, weights = np.polynomial.legendre.leggauss(int(q))
    return QuadRule(q=int(q), nodes=nodes, weights=weights)


def cell_points(mesh, xi):
    """Map reference points to every cell; result shape (n, len(xi))."""
    xi = np.asarray(xi, dtype=float)
    return mesh.nodes[:-1, None] + 0.5 * mesh.h * (xi[None, :] + 1.0)


def modal_project(fn, mesh, basis, q):
    """Cell-wise L2 projection of fn(x, v) onto the modal tensor basis.

    Returns coefficients with axes (x-cell, v-cell, x-mode, v-mode).  fn must
    broadcast over numpy arrays.
    """
    rule = gauss_rule(q)
    pts = cell_points(mesh, rule.nodes).ravel()
    vals = np.asarray(fn(pts[:, None], pts[None, :]), dtype=float)
    if vals.shape != (pts.size, pts.size):
        vals = np.broadcast_to(vals, (pts.size, pts.size))
    grid = vals.reshape(mesh.n, rule.q, mesh.n, rule.q)
    tab = basis.eval_table(rule.nodes) * rule.weights
    return 0.5 * mesh.h * np.einsum("ipjq,ap,bq->ijab", grid, tab, tab)


def modal_evaluate(coeffs, mesh, basis, xi):
    """Evaluate a coefficient tensor on the per-cell point grid xi x xi.

    Returns values with axes (x-cell, x-point, v-cell, v-point).
    """
    tab = basis.eval_table(xi)
    return (2.0 / mesh.h) * np.einsum("ijab,ap,bq->ipjq", coeffs, tab, tab)
