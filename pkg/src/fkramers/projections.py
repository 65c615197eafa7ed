"""1D and tensor projections onto polynomial spaces, plus superconvergence checks.

Three 1D projections of a function u onto polynomials of degree k on an
interval:

* "plain":  residual orthogonal to all polynomials of degree k;
* "plus":   residual orthogonal to degree k-1, exact at the left endpoint;
* "minus":  residual orthogonal to degree k-1, exact at the right endpoint.

Tensor combinations of these are what the error analysis of the scheme is
built on; `lemma_identity_residuals` evaluates the two exactness identities
that make the one-sided fluxes superconvergent, for polynomial inputs of
total degree k+1.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import PreconditionError
from .ldg import DGField
from .mesh import Basis, gauss_rule, legendre_table

KINDS = ("plain", "plus", "minus")

#: Tensor projection ids -> (x-kind, v-kind).
TENSOR_KINDS = {
    "pi": ("minus", "plus"),
    "pi_x": ("plain", "plain"),
    "pi_v_minus": ("plain", "minus"),
}


@dataclass(frozen=True)
class Projection1D:
    """A 1D projection operator onto degree-`degree` polynomials on `interval`."""

    kind: str
    degree: int
    interval: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError("unknown projection kind %r" % (self.kind,))
        if not isinstance(self.degree, Integral) or self.degree < 0:
            raise PreconditionError("projection degree must be a nonnegative integer")
        if self.kind != "plain" and self.degree < 1:
            raise PreconditionError(
                "kind %r needs degree >= 1 (no moment conditions remain at degree 0)"
                % (self.kind,)
            )
        lo, hi = self.interval
        if not hi > lo:
            raise PreconditionError("empty interval %r" % (self.interval,))

    @property
    def nmodes(self):
        return self.degree + 1

    def _width(self):
        lo, hi = self.interval
        return hi - lo

    def basis_values(self, x):
        """Orthonormal modal basis of the interval evaluated at physical points."""
        lo, hi = self.interval
        xi = 2.0 * (np.asarray(x, dtype=float) - lo) / (hi - lo) - 1.0
        return legendre_table(self.degree, xi) * np.sqrt(2.0 / self._width())

    def rows(self, q):
        """The defining functionals as (nodes, weights) pairs.

        Each functional acts as u -> sum(weights * u(nodes)); moment rows use
        a mapped Gauss rule, endpoint rows a single unit weight.
        """
        rule = gauss_rule(q)
        lo, hi = self.interval
        nodes = lo + 0.5 * self._width() * (rule.nodes + 1.0)
        scaled = 0.5 * self._width() * rule.weights
        tab = self.basis_values(nodes)
        nmom = self.nmodes if self.kind == "plain" else self.degree
        out = [(nodes, scaled * tab[b]) for b in range(nmom)]
        if self.kind == "plus":
            out.append((np.array([lo]), np.array([1.0])))
        elif self.kind == "minus":
            out.append((np.array([hi]), np.array([1.0])))
        return out

    def condition_matrix(self, q):
        """Rows of `rows(q)` applied to the modal basis; square and well conditioned."""
        mat = np.empty((self.nmodes, self.nmodes))
        for r, (nodes, weights) in enumerate(self.rows(q)):
            mat[r] = self.basis_values(nodes) @ weights
        return mat

    def apply(self, u, q=None):
        """Modal coefficients of the projection of the callable u."""
        if q is None:
            q = self.degree + 3
        rhs = np.empty(self.nmodes)
        for r, (nodes, weights) in enumerate(self.rows(q)):
            rhs[r] = float(np.asarray(u(nodes), dtype=float) @ weights)
        return np.linalg.solve(self.condition_matrix(q), rhs)

    def evaluate(self, coeffs, x):
        return coeffs @ self.basis_values(x)


def project_1d(kind, u, interval, k, q=None):
    """Project the callable u onto degree-k polynomials; returns modal coefficients."""
    return Projection1D(kind, k, tuple(interval)).apply(u, q=q)


def project_tensor(which, u, mesh, k, q=None):
    """Tensor projection of u(x, v) on every cell of the mesh.

    `which` is one of "pi" (minus in x, plus in v), "pi_x" (plain both), or
    "pi_v_minus" (plain in x, minus in v).  Returns a DGField.
    """
    if which not in TENSOR_KINDS:
        raise PreconditionError(
            "unknown tensor projection %r; expected one of %s"
            % (which, ", ".join(sorted(TENSOR_KINDS)))
        )
    kind_x, kind_v = TENSOR_KINDS[which]
    if q is None:
        q = k + 3
    basis = Basis(k)
    m = basis.nmodes
    coeffs = np.empty((mesh.n, mesh.n, m, m))
    for i in range(mesh.n):
        px = Projection1D(kind_x, k, (mesh.nodes[i], mesh.nodes[i + 1]))
        rows_x = px.rows(q)
        mat_x = px.condition_matrix(q)
        for j in range(mesh.n):
            pv = Projection1D(kind_v, k, (mesh.nodes[j], mesh.nodes[j + 1]))
            rows_v = pv.rows(q)
            mat_v = pv.condition_matrix(q)
            cond = np.empty((m, m))
            for r, (xn, xw) in enumerate(rows_x):
                for s, (vn, vw) in enumerate(rows_v):
                    cond[r, s] = xw @ np.asarray(u(xn[:, None], vn[None, :]), dtype=float) @ vw
            coeffs[i, j] = np.linalg.solve(
                mat_x, np.linalg.solve(mat_v, cond.T).T
            )
    return DGField(mesh, basis, coeffs)


def _poly_total_degree(coef):
    nz = np.argwhere(np.abs(coef) > 0)
    if nz.size == 0:
        return -1
    return int((nz[:, 0] + nz[:, 1]).max())


def _poly_partial(coef, axis):
    return npoly.polyder(coef, axis=axis)


def _polyval2d(x, v, coef):
    # polyval2d insists on identically shaped arguments; broadcast first so
    # outer-product grids and scalar-face evaluations both work
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    return npoly.polyval2d(x, v, coef)


def lemma_identity_residuals(u_coef, nux_coef, nuv_coef, cell, k, q=None):
    """Residuals of the two superconvergence identities on one cell.

    Arguments are 2D power-basis coefficient arrays (coef[i, j] multiplies
    x**i * v**j): u of total degree at most k+1, and the two test components
    of total degree at most k.  `cell` is ((x_lo, x_hi), (v_lo, v_hi)).

    Identity 1 pairs u - (tensor projection of u) with the x-derivative of
    the x test component and corrects with vertical-face terms where the
    projected trace is the one-sided 1D projection (plus-kind in v) of the
    exact face restriction.  Identity 2 is the v-direction analog with the
    minus-kind 1D projection in x on horizontal faces.  Both vanish for
    polynomial data, which is what makes the one-sided fluxes superconvergent.
    """
    u_coef = np.atleast_2d(np.asarray(u_coef, dtype=float))
    nux_coef = np.atleast_2d(np.asarray(nux_coef, dtype=float))
    nuv_coef = np.atleast_2d(np.asarray(nuv_coef, dtype=float))
    if _poly_total_degree(u_coef) > k + 1:
        raise PreconditionError("u must have total degree at most k+1")
    if max(_poly_total_degree(nux_coef), _poly_total_degree(nuv_coef)) > k:
        raise PreconditionError("test components must have total degree at most k")
    (x_lo, x_hi), (v_lo, v_hi) = cell
    if q is None:
        q = k + 3

    px = Projection1D("minus", k, (x_lo, x_hi))
    pv = Projection1D("plus", k, (v_lo, v_hi))
    mat_x = px.condition_matrix(q)
    mat_v = pv.condition_matrix(q)
    rows_x = px.rows(q)
    rows_v = pv.rows(q)

    def u_at(x, v):
        return _polyval2d(x, v, u_coef)

    cond = np.empty((k + 1, k + 1))
    for r, (xn, xw) in enumerate(rows_x):
        for s, (vn, vw) in enumerate(rows_v):
            cond[r, s] = xw @ u_at(xn[:, None], vn[None, :]) @ vw
    proj = np.linalg.solve(mat_x, np.linalg.solve(mat_v, cond.T).T)

    rule = gauss_rule(q)
    xq = x_lo + 0.5 * (x_hi - x_lo) * (rule.nodes + 1.0)
    vq = v_lo + 0.5 * (v_hi - v_lo) * (rule.nodes + 1.0)
    wx = 0.5 * (x_hi - x_lo) * rule.weights
    wv = 0.5 * (v_hi - v_lo) * rule.weights
    err_grid = u_at(xq[:, None], vq[None, :]) - (
        px.basis_values(xq).T @ proj @ pv.basis_values(vq)
    )

    dx_nux = _poly_partial(nux_coef, axis=0)
    dv_nuv = _poly_partial(nuv_coef, axis=1)

    # identity 1: volume term minus vertical-face corrections
    vol1 = wx @ (err_grid * _polyval2d(xq[:, None], vq[None, :], dx_nux)) @ wv

    def vertical_face(x_star):
        hat = pv.apply(lambda v: u_at(x_star, v), q=q)
        diff = u_at(x_star, vq) - pv.evaluate(hat, vq)
        return float((diff * _polyval2d(x_star, vq, nux_coef)) @ wv)

    res1 = vol1 - (vertical_face(x_hi) - vertical_face(x_lo))

    # identity 2: same with the roles of x and v exchanged
    vol2 = wx @ (err_grid * _polyval2d(xq[:, None], vq[None, :], dv_nuv)) @ wv

    def horizontal_face(v_star):
        hat = px.apply(lambda x: u_at(x, v_star), q=q)
        diff = u_at(xq, v_star) - px.evaluate(hat, xq)
        return float((diff * _polyval2d(xq, v_star, nuv_coef)) @ wx)

    res2 = vol2 - (horizontal_face(v_hi) - horizontal_face(v_lo))
    return float(res1), float(res2)
