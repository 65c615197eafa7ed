"""Convergence studies, stability probes, and a solution-regularity diagnostic.

The temporal studies measure self-convergence: the L2 distance at the final
time between runs with steps tau and tau/2 on one fixed mesh.  The spatial
studies measure the distance to a known exact solution through the nodal
reconstruction both are tabulated with.  Rates are pure arithmetic on the
stored errors, so tables can be reproduced exactly from their CSV form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cq import cq_weights
from .errors import MeshMismatch, PreconditionError
from .ldg import DGField, as_vector, build_system, march, run
from .mesh import gauss_rule, legendre_table, modal_evaluate

DEFAULT_RESOLUTIONS = (4, 8, 12, 16, 20)
DEFAULT_INV_TAUS = (10, 20, 40, 80, 160)


def rates_from_errors(resolutions, errors):
    """Observed orders: log(E_i / E_{i+1}) / log(r_{i+1} / r_i)."""
    res = [float(r) for r in resolutions]
    err = [float(e) for e in errors]
    return tuple(
        math.log(err[i] / err[i + 1]) / math.log(res[i + 1] / res[i])
        for i in range(len(err) - 1)
    )


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    """One refinement sweep at a fixed fractional order.

    `axis` names the refined quantity ("1/tau" or "N"); `params` records the
    quantities held fixed.
    """

    axis: str
    alpha: float
    k: int
    resolutions: tuple
    errors: tuple
    rates: tuple
    params: tuple = ()

    def __post_init__(self):
        if len(self.rates) != len(self.errors) - 1:
            raise PreconditionError("rate count must be error count minus one")
        if len(self.resolutions) != len(self.errors):
            raise PreconditionError("resolution count must match error count")
        if not all(np.isfinite(self.errors)) or not all(np.isfinite(self.rates)):
            raise PreconditionError("errors and rates must be finite")

    def to_csv(self):
        lines = ["resolution,error,rate"]
        for i, (res, err) in enumerate(zip(self.resolutions, self.errors)):
            rate = "" if i == 0 else "%.4f" % self.rates[i - 1]
            lines.append("%d,%.3E,%s" % (res, err, rate))
        return "\n".join(lines) + "\n"

    def to_markdown(self):
        head = "| alpha \\ %s | %s |" % (self.axis, " | ".join(str(r) for r in self.resolutions))
        sep = "|" + "---|" * (len(self.resolutions) + 1)
        errs = "| %.4g | %s |" % (self.alpha, " | ".join("%.3E" % e for e in self.errors))
        rates = "| rate |  | %s |" % (" | ".join("%.4f" % r for r in self.rates))
        return "\n".join([head, sep, errs, rates]) + "\n"


def l2_error(field, other, t=None, q=None):
    """L2 distance between a discrete field and a field or callable.

    Field-vs-field distances are exact (orthonormal basis); a callable is
    integrated with a Gauss rule of q points per direction (default k + 3)
    and is called as other(x, v) or other(x, v, t) when t is given.
    """
    if isinstance(other, DGField):
        if not (field.mesh.n == other.mesh.n and field.basis.degree == other.basis.degree):
            raise MeshMismatch("fields live on different discretizations")
        return float(np.linalg.norm(field.coeffs - other.coeffs))
    if q is None:
        q = field.basis.degree + 3
    rule = gauss_rule(q)
    mesh = field.mesh
    pts = (mesh.nodes[:-1, None] + 0.5 * mesh.h * (rule.nodes[None, :] + 1.0)).ravel()
    x = pts[:, None]
    v = pts[None, :]
    target = np.asarray(other(x, v) if t is None else other(x, v, t), dtype=float)
    target = np.broadcast_to(target, (pts.size, pts.size))
    vals = modal_evaluate(field.coeffs, mesh, field.basis, rule.nodes)
    diff = vals - target.reshape(mesh.n, rule.q, mesh.n, rule.q)
    w = 0.5 * mesh.h * rule.weights
    return float(np.sqrt(np.einsum("p,q,ipjq->", w, w, diff ** 2)))


def _lagrange_table(k, xi):
    """Values of the k+1 equispaced-node Lagrange basis on [-1,1] at points xi."""
    nodes = np.linspace(-1.0, 1.0, k + 1)
    xi = np.asarray(xi, dtype=float)
    table = np.ones((k + 1, xi.size))
    for p in range(k + 1):
        for r in range(k + 1):
            if r != p:
                table[p] *= (xi - nodes[r]) / (nodes[p] - nodes[r])
    return table


def nodal_values(field, mode, boundary_value=0.0):
    """Sample a field at the uniform global nodes, degree*N + 1 per direction.

    Interface nodes carry one trace per adjacent cell.  mode "average" takes
    the arithmetic mean of the adjacent traces and then overwrites the
    outermost nodes with `boundary_value`; mode "one_sided" keeps the trace
    of the last cell in ascending scan order and leaves the boundary alone.
    """
    mesh, basis = field.mesh, field.basis
    k = basis.degree
    n = mesh.n
    tab = legendre_table(k, np.linspace(-1.0, 1.0, k + 1))
    vals = np.einsum("ijab,ap,bq->ipjq", field.coeffs, tab, tab) * (2.0 / mesh.h)
    g = k * n + 1
    if mode == "one_sided":
        out = np.zeros((g, g))
        for i in range(n):
            for j in range(n):
                out[k * i:k * i + k + 1, k * j:k * j + k + 1] = vals[i, :, j, :]
        return out
    if mode != "average":
        raise PreconditionError("unknown trace resolution mode %r" % (mode,))
    acc = np.zeros((g, g))
    cnt = np.zeros((g, g))
    for i in range(n):
        for j in range(n):
            acc[k * i:k * i + k + 1, k * j:k * j + k + 1] += vals[i, :, j, :]
            cnt[k * i:k * i + k + 1, k * j:k * j + k + 1] += 1.0
    out = acc / cnt
    out[0, :] = out[-1, :] = out[:, 0] = out[:, -1] = boundary_value
    return out


def nodal_reconstruction_error(field, exact, t=None):
    """Table error: nodal reconstruction of the field vs the exact nodal data.

    Both the discrete solution and the exact function are represented by
    their values at the uniform global nodes and compared in L2 through the
    cellwise tensor Lagrange reconstruction of the difference.  Interface
    nodes are multi-valued for the discrete field; the convention under
    which the study's target tables were tabulated resolves them by degree:
    averaged traces with the boundary clamped to the prescribed boundary
    value for degree 1, one-sided traces for higher degrees.
    """
    mesh, basis = field.mesh, field.basis
    k = basis.degree
    n = mesh.n
    mode = "average" if k == 1 else "one_sided"
    recon = nodal_values(field, mode)
    grid = np.linspace(0.0, 1.0, k * n + 1)
    x = grid[:, None]
    v = grid[None, :]
    target = np.asarray(exact(x, v) if t is None else exact(x, v, t), dtype=float)
    dif = recon - np.broadcast_to(target, recon.shape)
    rule = gauss_rule(k + 2)
    lag = _lagrange_table(k, rule.nodes)
    idx = k * np.arange(n)[:, None] + np.arange(k + 1)[None, :]
    per_cell = dif[idx[:, None, :, None], idx[None, :, None, :]]
    quad_vals = np.einsum("ijpq,pg,qh->ijgh", per_cell, lag, lag)
    w = 0.5 * mesh.h * rule.weights
    return float(np.sqrt(np.einsum("ijgh,g,h->", quad_vals ** 2, w, w)))


def temporal_study(problem, n=16, k=1, inv_taus=DEFAULT_INV_TAUS, theta=1.0):
    """Self-convergence in time on a fixed mesh.

    For each resolution 1/tau in `inv_taus`, the error is the final-time L2
    distance between the run with step tau and the run with step tau/2;
    halved runs are shared between neighboring resolutions.
    """
    inv_taus = tuple(int(r) for r in inv_taus)
    if any(r < 1 for r in inv_taus):
        raise PreconditionError("temporal resolutions must be positive integers")
    needed = sorted(set(inv_taus) | {2 * r for r in inv_taus})
    finals = {}
    for inv in needed:
        finals[inv] = run(problem, n, k, problem.t_final / inv, theta).final
    errors = tuple(
        l2_error(finals[inv], finals[2 * inv]) for inv in inv_taus
    )
    return ConvergenceTable(
        axis="1/tau",
        alpha=problem.alpha,
        k=k,
        resolutions=inv_taus,
        errors=errors,
        rates=rates_from_errors(inv_taus, errors),
        params=(("problem", problem.name), ("N", n), ("T", problem.t_final), ("theta", theta)),
    )


def spatial_study(problem, k, tau, resolutions=DEFAULT_RESOLUTIONS, theta=1.0):
    """Convergence in space against the problem's exact solution.

    Errors are final-time nodal reconstruction distances (see
    nodal_reconstruction_error), the convention of the target tables this
    study reproduces.
    """
    if problem.exact is None:
        raise PreconditionError("spatial study needs a problem with an exact solution")
    resolutions = tuple(int(r) for r in resolutions)
    errors = []
    for n in resolutions:
        traj = run(problem, n, k, tau, theta)
        errors.append(nodal_reconstruction_error(traj.final, problem.exact, t=problem.t_final))
    errors = tuple(errors)
    return ConvergenceTable(
        axis="N",
        alpha=problem.alpha,
        k=k,
        resolutions=resolutions,
        errors=errors,
        rates=rates_from_errors(resolutions, errors),
        params=(("problem", problem.name), ("tau", tau), ("T", problem.t_final), ("theta", theta)),
    )


def trajectory_growth(system, weights, g0_vec, steps):
    """max_n ||g^n|| / ||g^0|| for a source-free run; 0 for zero initial data."""
    norm0 = np.linalg.norm(g0_vec)
    if norm0 == 0.0:
        return 0.0
    levels = march(system, weights, g0_vec, lambda n: None, steps)
    norms = np.linalg.norm(levels[1:], axis=1)
    return float(norms.max() / norm0)


def stability_probe(alpha, n=8, k=1, tau=0.02, trials=10, theta=1.0, seed=0, t_final=1.0):
    """Largest growth ratio over random initial coefficient vectors.

    Runs the source-free scheme to t_final from `trials` standard-normal
    coefficient vectors and reports the maximum of max_n ||g^n|| / ||g^0||.
    A value comfortably below the frozen bound demonstrates the unconditional
    stability of the implicit scheme.
    """
    from .mesh import Basis, build_mesh  # local import to keep module load light

    mesh = build_mesh(n)
    basis = Basis(k)
    steps = round(t_final / tau)
    if abs(steps * tau - t_final) > 1e-9 * max(t_final, tau) or steps < 1:
        raise PreconditionError("t_final must be an integral multiple of tau")
    weights = cq_weights(alpha, tau, steps)
    system = build_system(mesh, basis, weights.d[0], theta)
    ndof = (mesh.n * basis.nmodes) ** 2
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(trials)):
        g0 = rng.standard_normal(ndof)
        worst = max(worst, trajectory_growth(system, weights, g0, steps))
    return worst


@dataclass(frozen=True, eq=False)
class RegularityFit:
    """Least-squares slope of log ||time difference quotient|| vs log t."""

    slope: float
    degenerate: bool
    times: np.ndarray
    quotients: np.ndarray


def regularity_diagnostic(problem, n=16, k=1, tau=0.01, theta=1.0):
    """Fit the decay exponent of the discrete time derivative.

    Computes D_m = ||g^m - g^{m-1}|| / tau and fits log D against log t_m
    over the window m in [2, steps/2] (the first step is excluded; the window
    stays clear of the final-time regime).  A slope near -1 reflects the
    characteristic initial-layer behavior for nonsmooth data.  If the
    quotients vanish (steady solutions) the fit is flagged degenerate.
    """
    traj = run(problem, n, k, tau, theta)
    steps = len(traj.fields) - 1
    if steps < 4:
        raise PreconditionError("too few steps for a regularity fit")
    vecs = np.array([as_vector(f.coeffs) for f in traj.fields])
    quots = np.linalg.norm(np.diff(vecs, axis=0), axis=1) / traj.tau
    times = traj.times[1:]
    lo, hi = 2, steps // 2  # 1-based step indices of the fit window
    window_q = quots[lo - 1:hi]
    window_t = times[lo - 1:hi]
    if window_q.size < 2 or np.any(window_q <= 1e-14 * max(1.0, quots.max())):
        return RegularityFit(slope=float("nan"), degenerate=True, times=times, quotients=quots)
    slope = float(np.polyfit(np.log(window_t), np.log(window_q), 1)[0])
    return RegularityFit(slope=slope, degenerate=False, times=times, quotients=quots)
