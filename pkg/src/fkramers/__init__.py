"""Convolution-quadrature / local-DG solver for a fractional kinetic equation.

The model is a phase-space (position x, velocity v) diffusion problem on the
unit square whose time derivative is fractional of order alpha in (0, 1);
time stepping uses backward-Euler convolution quadrature and space is
discretized with a local discontinuous Galerkin method on tensor meshes.
"""

from .cq import CQWeights, cq_weights, history_combination
from .errors import (
    ConfigError,
    InvalidResolution,
    MeshMismatch,
    MisalignedDiscontinuity,
    OrderOutOfRange,
    PreconditionError,
    SolverFailure,
)
from .ldg import (
    DGField,
    LDGSystem,
    Trajectory,
    assemble_gradient,
    assemble_spatial,
    assemble_system,
    build_system,
    field_to_csv,
    project_initial,
    run,
    step,
)
from .mesh import (
    Basis,
    Mesh2D,
    QuadRule,
    build_mesh,
    gauss_rule,
    legendre_eval,
    modal_evaluate,
    modal_project,
)
from .problems import (
    PROBLEM_IDS,
    ProblemSpec,
    example1,
    example2,
    get_problem,
    load_vector,
    require_mesh_aligned,
)
from .projections import (
    Projection1D,
    lemma_identity_residuals,
    project_1d,
    project_tensor,
)
from .study import (
    ConvergenceTable,
    RegularityFit,
    l2_error,
    nodal_reconstruction_error,
    nodal_values,
    rates_from_errors,
    regularity_diagnostic,
    spatial_study,
    stability_probe,
    temporal_study,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "CQWeights",
    "ConfigError",
    "ConvergenceTable",
    "DGField",
    "InvalidResolution",
    "LDGSystem",
    "Mesh2D",
    "MeshMismatch",
    "MisalignedDiscontinuity",
    "OrderOutOfRange",
    "PreconditionError",
    "PROBLEM_IDS",
    "ProblemSpec",
    "Projection1D",
    "QuadRule",
    "RegularityFit",
    "SolverFailure",
    "Trajectory",
    "assemble_gradient",
    "assemble_spatial",
    "assemble_system",
    "build_mesh",
    "build_system",
    "cq_weights",
    "example1",
    "example2",
    "field_to_csv",
    "gauss_rule",
    "get_problem",
    "history_combination",
    "l2_error",
    "legendre_eval",
    "lemma_identity_residuals",
    "load_vector",
    "modal_evaluate",
    "modal_project",
    "nodal_reconstruction_error",
    "nodal_values",
    "project_1d",
    "project_initial",
    "project_tensor",
    "rates_from_errors",
    "regularity_diagnostic",
    "run",
    "spatial_study",
    "stability_probe",
    "step",
    "temporal_study",
]
