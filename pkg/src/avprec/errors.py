"""Exception types raised across the package."""


class HierarchyError(ValueError):
    """A grid hierarchy cannot satisfy the requested coarsening rule."""


class SingularShiftError(ValueError):
    """The shift coincides (numerically) with an eigenvalue of a Laplacian."""


class NotSPDError(ArithmeticError):
    """An operator required to be symmetric positive definite is not."""


class DenseGuardError(ValueError):
    """A dense computation was requested above the configured size guard."""


class ConvergenceError(RuntimeError):
    """An inner dense iteration (e.g. Jacobi sweeps) failed to converge."""
