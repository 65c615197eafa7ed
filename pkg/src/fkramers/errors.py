"""Shared exception types for argument validation and solver failures."""


class PreconditionError(ValueError):
    """An argument violates a documented precondition."""


class InvalidResolution(PreconditionError):
    """Mesh resolution must be a positive integer."""


class OrderOutOfRange(PreconditionError):
    """Fractional order outside the supported range (0, 1]."""


class MisalignedDiscontinuity(PreconditionError):
    """Problem data jumps along a line that is not a mesh line."""

    def __init__(self, coordinate, n):
        self.coordinate = coordinate
        self.n = n
        super().__init__(
            "discontinuity line at coordinate %r is not a mesh line for N=%d"
            % (coordinate, n)
        )


class MeshMismatch(PreconditionError):
    """Fields living on different meshes or bases were combined."""


class SolverFailure(RuntimeError):
    """Sparse factorization or linear solve failed."""


class ConfigError(ValueError):
    """Malformed command line or configuration file."""
