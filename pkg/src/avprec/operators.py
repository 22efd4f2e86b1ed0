"""Matrix-free operators and the dense oracles built on them.

Production paths only ever call :meth:`LinearOperator.apply`. The dense
absolute value, the ideal preconditioner ``|A|^{-1}`` and friends exist to
check the matrix-free code on small problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import grid
from .errors import DenseGuardError, SingularShiftError

DENSE_GUARD = 20000


class LinearOperator:
    """A square linear map given by its action on vectors.

    ``symmetric`` and ``spd`` are promises made by the constructor of the
    operator; they are checked in the tests, not at apply time.
    """

    def __init__(self, n: int, apply: Callable, symmetric: bool = False, spd: bool = False, name: str = ""):
        self.n = int(n)
        self._apply = apply
        self.symmetric = bool(symmetric or spd)
        self.spd = bool(spd)
        self.name = name

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"{self.name or 'operator'}: expected length {self.n}, got shape {v.shape}")
        return self._apply(v)

    __call__ = apply

    def __matmul__(self, v):
        return self.apply(v)

    def materialize(self) -> np.ndarray:
        """Dense matrix, column ``i`` being the image of unit vector ``e_i``."""
        M = np.empty((self.n, self.n))
        e = np.zeros(self.n)
        for i in range(self.n):
            e[i] = 1.0
            M[:, i] = self.apply(e)
            e[i] = 0.0
        return M

    def __repr__(self):
        flags = "spd" if self.spd else ("symmetric" if self.symmetric else "general")
        return f"LinearOperator({self.name or '?'}, n={self.n}, {flags})"


class CountingOperator(LinearOperator):
    """Wraps an operator and counts how often it is applied."""

    def __init__(self, op: LinearOperator):
        super().__init__(op.n, op.apply, op.symmetric, op.spd, f"counted({op.name})")
        self.count = 0

    def apply(self, v):
        self.count += 1
        return super().apply(v)

    __call__ = apply


def from_matrix(M: np.ndarray, symmetric: bool = False, spd: bool = False, name: str = "matrix") -> LinearOperator:
    M = np.asarray(M, dtype=float)
    return LinearOperator(M.shape[0], lambda v: M @ v, symmetric, spd, name)


def identity(n: int) -> LinearOperator:
    return LinearOperator(n, lambda v: v.copy(), True, True, "I")


def laplacian(level: grid.GridLevel) -> LinearOperator:
    return LinearOperator(level.n, lambda v: grid.apply_laplacian(level, v), True, True, f"L[{level.n1d}]")


def shifted_laplacian(level: grid.GridLevel, c2: float) -> LinearOperator:
    """``A = L - c2*I`` applied through the stencil; symmetric, generally indefinite."""
    c2 = float(c2)
    return LinearOperator(level.n, lambda v: grid.apply_laplacian(level, v, c2), True, c2 <= 0,
                          f"L[{level.n1d}]-{c2:g}I")


@dataclass(frozen=True)
class DenseSpectralFactorization:
    """``A = V diag(eigenvalues) V^T`` with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def p(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < 0))

    def function(self, f: Callable) -> np.ndarray:
        V = self.eigenvectors
        return (V * f(self.eigenvalues)) @ V.T

    def matrix(self) -> np.ndarray:
        return self.function(lambda x: x)

    def abs_matrix(self) -> np.ndarray:
        return self.function(np.abs)

    def step_matrix(self) -> np.ndarray:
        """``h_0(A)``: projector onto the eigenspace of nonnegative eigenvalues."""
        return self.function(lambda x: (x >= 0).astype(float))


def _dense_symmetric(op: LinearOperator, guard: int) -> np.ndarray:
    if not op.symmetric:
        raise ValueError(f"{op.name}: operator must be symmetric")
    if op.n > guard:
        raise DenseGuardError(f"dense work requested for n={op.n} > guard {guard}")
    M = op.materialize()
    return 0.5 * (M + M.T)


def factorize(op: LinearOperator, guard: int = DENSE_GUARD, method: str = "auto") -> DenseSpectralFactorization:
    """Materialize a symmetric operator and eigendecompose it."""
    from .spectral import eigensym

    lam, V = eigensym(_dense_symmetric(op, guard), method=method)
    return DenseSpectralFactorization(lam, V)


def dense_absolute_value(op: LinearOperator, mode: str = "full", guard: int = DENSE_GUARD, method: str = "auto"):
    """``|A| = V |Lambda| V^T`` as a dense matrix (``mode='full'``) or the factorization."""
    fac = factorize(op, guard, method)
    if mode == "factored":
        return fac
    if mode != "full":
        raise ValueError(f"mode must be 'full' or 'factored', got {mode!r}")
    return fac.abs_matrix()


def ideal_av_preconditioner(op: LinearOperator, guard: int = DENSE_GUARD, method: str = "auto") -> LinearOperator:
    """The ideal absolute-value preconditioner ``T = |A|^{-1}``."""
    fac = factorize(op, guard, method)
    lam = fac.eigenvalues
    scale = max(np.max(np.abs(lam)), np.finfo(float).tiny)
    if np.min(np.abs(lam)) <= 1e-12 * scale:
        raise SingularShiftError(f"{op.name}: operator is numerically singular")
    V = fac.eigenvectors
    inv_abs = 1.0 / np.abs(lam)
    return LinearOperator(op.n, lambda r: V @ (inv_abs * (V.T @ r)), True, True, f"|{op.name}|^-1")


def sine_basis_function(level: grid.GridLevel, weights: np.ndarray, name: str, spd: bool) -> LinearOperator:
    """Operator ``V diag(weights) V^T`` in the analytic sine eigenbasis of ``L``."""
    w = np.asarray(weights, dtype=float)
    return LinearOperator(level.n, lambda r: grid.sine_transform(level, w * grid.sine_transform(level, r)),
                          True, spd, name)


def poisson_inverse(level: grid.GridLevel) -> LinearOperator:
    """Exact ``T = L^{-1}`` via sine transforms."""
    return sine_basis_function(level, 1.0 / grid.laplacian_eigenvalues(level), f"L[{level.n1d}]^-1", True)
