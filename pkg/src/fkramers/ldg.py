"""Local discontinuous Galerkin discretization and the implicit stepping loop.

Space: full tensor modal basis of degree k per cell on a uniform square mesh.
The auxiliary gradient uses one-sided fluxes: in x the trace from the left
with zero inflow at x = 0, in v the trace from above with zero boundary
values at v = 0 and v = 1.  The diffusion flux takes the trace from below,
plus a penalty term theta/h acting on the solution trace along v = 0.

Because the basis is orthonormal per cell, element mass matrices are the
identity; the auxiliary variables are eliminated element-locally and a single
sparse system in the primary unknown is factorized once per run and reused
for every time step.

The per-cell coefficient layout is (x-cell i, v-cell j, x-mode a, v-mode b).
Internally vectors are raveled in the order (i, a, j, b) so every global
operator is a Kronecker product of small 1D operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Integral
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cq import cq_weights, history_combination
from .errors import MeshMismatch, PreconditionError, SolverFailure
from .mesh import Basis, Mesh2D, build_mesh, gauss_rule, modal_project
from .problems import load_vector, require_mesh_aligned

#: Relative residual accepted from the direct solver.
SOLVE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class DGField:
    """A discrete field: modal coefficients on every cell.

    The L2 norm over the square equals the Euclidean norm of `coeffs`.
    """

    mesh: Mesh2D
    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        m = self.basis.nmodes
        expected = (self.mesh.n, self.mesh.n, m, m)
        if self.coeffs.shape != expected:
            raise PreconditionError(
                "coefficient tensor has shape %r, expected %r" % (self.coeffs.shape, expected)
            )

    def l2_norm(self):
        return float(np.linalg.norm(self.coeffs))

    def copy(self):
        return DGField(self.mesh, self.basis, self.coeffs.copy())

    @classmethod
    def zeros(cls, mesh, basis):
        m = basis.nmodes
        return cls(mesh, basis, np.zeros((mesh.n, mesh.n, m, m)))


def same_discretization(a, b):
    return a.mesh.n == b.mesh.n and a.basis.degree == b.basis.degree


def as_vector(coeffs):
    """Ravel (i, j, a, b) coefficients into the Kronecker ordering (i, a, j, b)."""
    return np.ascontiguousarray(coeffs.transpose(0, 2, 1, 3)).ravel()


def as_coeffs(vec, n, nmodes):
    """Inverse of :func:`as_vector`."""
    return np.ascontiguousarray(vec.reshape(n, nmodes, n, nmodes).transpose(0, 2, 1, 3))


def _reference_blocks(basis, q):
    """Small dense matrices on the reference interval used by all operators."""
    rule = gauss_rule(q)
    tab = basis.eval_table(rule.nodes)
    dtab = basis.deriv_table(rule.nodes)
    der = (tab * rule.weights) @ dtab.T        # der[c, a] = int phi_c phi_a'
    jmat = (tab * (rule.weights * rule.nodes)) @ tab.T  # int xi phi_d phi_b
    el = basis.left_values()
    er = basis.right_values()
    return der, jmat, el, er


def _shift(n, offset):
    return sp.diags(np.ones(n - abs(offset)), offset, shape=(n, n))


def _one_d_operators(mesh, basis, q):
    """The five 1D operators whose Kronecker products build the scheme."""
    n, h, m = mesh.n, mesh.h, basis.nmodes
    der, jmat, el, er = _reference_blocks(basis, q)
    eye_cells = sp.identity(n)
    first = sp.csr_matrix(([1.0], ([0], [0])), shape=(n, n))
    tail = sp.diags(np.r_[0.0, np.ones(n - 1)])  # cells with an interior lower face

    two_h = 2.0 / h
    grad_x = two_h * (
        sp.kron(eye_cells, der + np.outer(el, el)) - sp.kron(_shift(n, -1), np.outer(el, er))
    )
    grad_v = two_h * (
        sp.kron(eye_cells, der - np.outer(er, er))
        + sp.kron(first, np.outer(el, el))
        + sp.kron(_shift(n, 1), np.outer(er, el))
    )
    div_v = two_h * (
        sp.kron(eye_cells, -der)
        - sp.kron(tail, np.outer(el, el))
        + sp.kron(_shift(n, -1), np.outer(el, er))
    )
    vmass = sp.kron(sp.diags(mesh.centers), sp.identity(m)) + 0.5 * h * sp.kron(eye_cells, jmat)
    penalty = (2.0 / h ** 2) * sp.kron(first, np.outer(el, el))
    return grad_x, grad_v, div_v, vmass, penalty


def assemble_gradient(mesh, basis, q=None):
    """Sparse discrete-gradient operators (d_x, d_v).

    Applied to a raveled coefficient vector they yield the modal coefficients
    of the auxiliary gradient components (the element mass matrix is the
    identity, so no extra solve is needed).
    """
    if q is None:
        q = basis.degree + 2
    grad_x, grad_v, _, _, _ = _one_d_operators(mesh, basis, q)
    block = mesh.n * basis.nmodes
    d_x = sp.kron(grad_x, sp.identity(block)).tocsr()
    d_v = sp.kron(sp.identity(block), grad_v).tocsr()
    return d_x, d_v


def assemble_spatial(mesh, basis, theta, q=None):
    """Sparse spatial operator acting on the primary unknown.

    Composes transport in x, transport and diffusion in v, the boundary
    penalty along v = 0 scaled by theta, and the negative unit zeroth-order
    shift coming from rewriting the drift divergence.
    """
    theta = float(theta)
    if not theta > 0.0:
        raise PreconditionError("penalty parameter must be positive, got %r" % (theta,))
    if q is None:
        q = basis.degree + 2
    grad_x, grad_v, div_v, vmass, penalty = _one_d_operators(mesh, basis, q)
    block = mesh.n * basis.nmodes
    eye_block = sp.identity(block)
    d_x = sp.kron(grad_x, eye_block)
    d_v = sp.kron(eye_block, grad_v)
    t_v = sp.kron(eye_block, div_v)
    w = sp.kron(eye_block, vmass)
    pen = sp.kron(eye_block, penalty)
    ndof = block * block
    l_h = w @ (d_x - d_v) + t_v @ d_v + theta * pen - sp.identity(ndof)
    return l_h.tocsr()


@dataclass(eq=False)
class LDGSystem:
    """Assembled and factorized time-step system; immutable after construction.

    The matrix is d0 * mass + spatial and does not change between steps, so
    the sparse LU factorization is computed once and shared.
    """

    mesh: Mesh2D
    basis: Basis
    theta: float
    d0: float
    mass: sp.csr_matrix
    spatial: sp.csr_matrix
    matrix: sp.csr_matrix
    lu: object = field(repr=False)

    def solve(self, rhs):
        x = self.lu.solve(rhs)
        resid = np.linalg.norm(self.matrix @ x - rhs)
        if not np.isfinite(resid) or resid > SOLVE_RTOL * max(np.linalg.norm(rhs), 1e-30):
            raise SolverFailure(
                "direct solve residual %.3e exceeds %.1e of the load norm" % (resid, SOLVE_RTOL)
            )
        return x


def _first_bad_pivot(matrix):
    """Index of the first (near-)zero pivot, found densely; -1 if none."""
    if matrix.shape[0] > 5000:
        return -1
    dense = matrix.toarray()
    lu, _ = scipy.linalg.lu_factor(dense, check_finite=False)
    diag = np.abs(np.diag(lu))
    bad = np.flatnonzero(diag <= 1e-14 * max(1.0, diag.max()))
    return int(bad[0]) if bad.size else -1


def assemble_system(spatial, mass, d0, *, mesh=None, basis=None, theta=float("nan")):
    """Factorize d0 * mass + spatial once for reuse across all time steps."""
    d0 = float(d0)
    if not d0 > 0.0:
        raise PreconditionError("leading weight d0 must be positive, got %r" % (d0,))
    matrix = (d0 * mass + spatial).tocsr()
    try:
        lu = spla.splu(matrix.tocsc())
    except RuntimeError as exc:
        pivot = _first_bad_pivot(matrix)
        raise SolverFailure(
            "sparse factorization failed (%s); first bad pivot index %d -- "
            "the time step may be too large for the zeroth-order shift" % (exc, pivot)
        ) from exc
    return LDGSystem(
        mesh=mesh, basis=basis, theta=theta, d0=d0, mass=mass.tocsr(),
        spatial=spatial.tocsr(), matrix=matrix, lu=lu,
    )


def build_system(mesh, basis, d0, theta, q=None):
    """Assemble the spatial operator and factorize the step matrix."""
    spatial = assemble_spatial(mesh, basis, theta, q=q)
    mass = sp.identity(spatial.shape[0], format="csr")
    return assemble_system(spatial, mass, d0, mesh=mesh, basis=basis, theta=float(theta))


def project_initial(g0, mesh, basis, q=None, discontinuities=()):
    """Cell-wise L2 projection of the initial data onto the discrete space."""
    require_mesh_aligned(discontinuities, mesh)
    if q is None:
        q = basis.degree + 2
    return DGField(mesh, basis, modal_project(g0, mesh, basis, q))


def step(system, weights, history, load=None):
    """Advance one time step given the full history g^0 .. g^{n-1}.

    `history` is a sequence of DGFields; `load` is a modal load tensor (or
    None for a source-free step).  Returns g^n as a DGField.
    """
    if not history:
        raise PreconditionError("history must contain at least the initial state")
    mesh, basis = history[0].mesh, history[0].basis
    for fld in history[1:]:
        if not same_discretization(fld, history[0]):
            raise MeshMismatch("history fields live on different discretizations")
    n = len(history)
    past = [as_vector(fld.coeffs) for fld in history[1:]]
    rhs = history_combination(weights, past, as_vector(history[0].coeffs), n)
    if load is not None:
        rhs = rhs + as_vector(np.asarray(load, dtype=float))
    x = system.solve(rhs)
    return DGField(mesh, basis, as_coeffs(x, mesh.n, basis.nmodes))


@dataclass(eq=False)
class Trajectory:
    """All time levels of one run; `fields[n]` is the state at t = n * tau."""

    problem: object
    mesh: Mesh2D
    basis: Basis
    tau: float
    theta: float
    times: np.ndarray
    fields: list
    system: Optional[LDGSystem]

    @property
    def final(self):
        return self.fields[-1]


def _integral_steps(t_final, tau):
    steps = round(t_final / tau)
    if abs(steps * tau - t_final) > 1e-9 * max(t_final, tau):
        raise PreconditionError(
            "final time %r is not an integral multiple of the step %r" % (t_final, tau)
        )
    return int(steps)


def march(system, weights, g0_vec, load_fn, steps):
    """Run the stepping loop on raw vectors; returns all levels, shape (steps+1, ndof).

    load_fn(n) must return the raveled load at t_n, or None when source-free.
    The history recombination uses the partial-sum form, so only O(steps)
    storage and one dot product per step are needed.
    """
    d = weights.d
    s = weights.partial_sums
    levels = np.empty((steps + 1, g0_vec.size))
    levels[0] = g0_vec
    for n in range(1, steps + 1):
        rhs = s[n - 1] * g0_vec
        if n > 1:
            rhs = rhs - d[1:n] @ levels[n - 1:0:-1]
        extra = load_fn(n)
        if extra is not None:
            rhs = rhs + extra
        levels[n] = system.solve(rhs)
    return levels


def run(problem, n, k, tau, theta=1.0):
    """Solve the problem on an n x n mesh with degree-k elements and step tau.

    Returns the full trajectory.  T = 0 yields just the projected initial
    state.  The system matrix is assembled and factorized exactly once.
    """
    tau = float(tau)
    if not tau > 0.0:
        raise PreconditionError("time step must be positive, got %r" % (tau,))
    mesh = build_mesh(n)
    basis = Basis(k)
    steps = _integral_steps(problem.t_final, tau)
    g0_field = project_initial(
        problem.g0, mesh, basis, discontinuities=problem.discontinuities
    )
    times = tau * np.arange(steps + 1)
    if steps == 0:
        return Trajectory(
            problem=problem, mesh=mesh, basis=basis, tau=tau, theta=float(theta),
            times=times, fields=[g0_field], system=None,
        )
    weights = cq_weights(problem.alpha, tau, steps)
    system = build_system(mesh, basis, weights.d[0], theta)

    if problem.f is None:
        load_fn = lambda n_: None
    else:
        def load_fn(n_):
            return as_vector(load_vector(problem, times[n_], mesh, basis))

    levels = march(system, weights, as_vector(g0_field.coeffs), load_fn, steps)
    fields = [g0_field] + [
        DGField(mesh, basis, as_coeffs(levels[i], mesh.n, basis.nmodes))
        for i in range(1, steps + 1)
    ]
    return Trajectory(
        problem=problem, mesh=mesh, basis=basis, tau=tau, theta=float(theta),
        times=times, fields=fields, system=system,
    )


def field_to_csv(fld):
    """CSV dump of a field: one row per coefficient, cells 1-based."""
    lines = ["i,j,mode_a,mode_b,coefficient"]
    n, m = fld.mesh.n, fld.basis.nmodes
    for i in range(n):
        for j in range(n):
            for a in range(m):
                for b in range(m):
                    lines.append(
                        "%d,%d,%d,%d,%.3E" % (i + 1, j + 1, a, b, fld.coeffs[i, j, a, b])
                    )
    return "\n".join(lines) + "\n"
