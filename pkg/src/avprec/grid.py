"""Uniform-grid Dirichlet Laplacians in 1D/2D, grid hierarchies and transfers.

Vectors are dense float64 arrays in lexicographic node order with the x index
running fastest, so 2D node ``(i, j)`` (1-based) sits at ``(j-1)*n1d + i - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.fft import dst

from . import kernels
from .errors import HierarchyError, SingularShiftError

RESONANCE_RTOL = 1e-8


@dataclass(frozen=True)
class GridLevel:
    """One uniform grid with ``n1d`` (odd) interior points per axis."""

    dim: int
    n1d: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n1d < 1 or self.n1d % 2 == 0:
            raise ValueError(f"n1d must be a positive odd integer, got {self.n1d}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n1d + 1)

    @property
    def n(self) -> int:
        return self.n1d ** self.dim

    @property
    def shape(self) -> tuple:
        return (self.n1d,) * self.dim

    def coarser(self) -> "GridLevel":
        if self.n1d < 3:
            raise HierarchyError("a 1-point grid cannot be coarsened")
        return GridLevel(self.dim, (self.n1d + 1) // 2 - 1)

    def finer(self) -> "GridLevel":
        return GridLevel(self.dim, 2 * self.n1d + 1)


@dataclass(frozen=True)
class GridHierarchy:
    """Levels ordered coarsest (index 0) to finest (index ``s``), plus the shift."""

    levels: tuple
    c2: float

    def __post_init__(self):
        if len(self.levels) < 2:
            raise HierarchyError("a hierarchy needs at least two levels")
        for coarse, fine in zip(self.levels[:-1], self.levels[1:]):
            if coarse != fine.coarser():
                raise HierarchyError("levels must follow standard coarsening h_{l-1} = 2 h_l")

    @property
    def c(self) -> float:
        return float(np.sqrt(self.c2))

    @property
    def dim(self) -> int:
        return self.levels[0].dim

    @property
    def fine(self) -> GridLevel:
        return self.levels[-1]

    @property
    def coarse(self) -> GridLevel:
        return self.levels[0]

    @property
    def s(self) -> int:
        return len(self.levels) - 1

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, l):
        return self.levels[l]

    def ch(self, l: int) -> float:
        return self.c * self.levels[l].h

    @classmethod
    def standard(cls, dim: int, fine_exponent: int, coarse_exponent: int, c2: float) -> "GridHierarchy":
        """Hierarchy from ``h = 2**-fine_exponent`` down to ``2**-coarse_exponent``.

        No shift-dependent checks are made; see :func:`build_hierarchy`.
        """
        if not 1 <= coarse_exponent < fine_exponent:
            raise HierarchyError("need 1 <= coarse_exponent < fine_exponent")
        levels = tuple(GridLevel(dim, 2 ** k - 1) for k in range(coarse_exponent, fine_exponent + 1))
        return cls(levels, float(c2))

    def truncated(self, coarsest: int) -> "GridHierarchy":
        """Drop levels below index ``coarsest`` (it becomes the new level 0)."""
        return GridHierarchy(self.levels[coarsest:], self.c2)


def build_hierarchy(dim: int, fine_exponent: int, c2: float) -> GridHierarchy:
    """Hierarchy with ``c*h_l < 1`` on all levels but the coarsest, where ``c*h_0 >= 1``.

    Parameters
    ----------
    dim : int
        1 or 2.
    fine_exponent : int
        Fine mesh size is ``h = 2**-fine_exponent``.
    c2 : float
        Positive shift.

    Raises
    ------
    HierarchyError
        If ``c2 <= 0``, the fine grid violates ``c*h < 1``, or coarsening
        reaches a single point without ever getting ``c*h >= 1``.
    SingularShiftError
        If ``c2`` lies within relative distance 1e-8 of an eigenvalue of a
        Laplacian on some level.
    """
    if not c2 > 0:
        raise HierarchyError(f"shift c2 must be positive, got {c2}")
    if fine_exponent < 2:
        raise HierarchyError("fine_exponent must be at least 2")
    c = np.sqrt(c2)
    fine = GridLevel(dim, 2 ** fine_exponent - 1)
    if not c * fine.h < 1:
        raise HierarchyError(f"fine grid violates c*h < 1 (c*h = {c * fine.h:.4g})")
    levels = [fine]
    while c * levels[-1].h < 1:
        if levels[-1].n1d < 3:
            raise HierarchyError(f"no level with c*h >= 1 before reaching a 1-point grid (c2={c2})")
        levels.append(levels[-1].coarser())
    levels.reverse()
    hier = GridHierarchy(tuple(levels), float(c2))
    check_resonance(hier.levels, c2)
    return hier


def check_resonance(levels: Sequence[GridLevel], c2: float, rtol: float = RESONANCE_RTOL) -> None:
    """Raise :class:`SingularShiftError` if ``c2`` is near an eigenvalue on any level."""
    if c2 == 0:
        return
    for lev in levels:
        gap = np.min(np.abs(laplacian_eigenvalues(lev) - c2)) / abs(c2)
        if gap < rtol:
            raise SingularShiftError(
                f"shift c2={c2} is within relative {gap:.2e} of a Laplacian eigenvalue on the grid n1d={lev.n1d}"
            )


def _check_size(level: GridLevel, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (level.n,):
        raise ValueError(f"expected a vector of length {level.n}, got shape {v.shape}")
    return np.ascontiguousarray(v)


def apply_laplacian(level: GridLevel, v: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """Stencil apply of ``L - shift*I`` (pure; the input is not modified)."""
    v = _check_size(level, v)
    return kernels.apply_stencil(v, level.n1d, level.dim, 1.0 / level.h ** 2, float(shift))


def restrict(fine: GridLevel, v: np.ndarray) -> np.ndarray:
    """Full weighting onto the next-coarser level (tensor product in 2D)."""
    if fine.n1d < 3:
        raise HierarchyError("cannot restrict from a coarsest (1-point) grid")
    v = _check_size(fine, v)
    return kernels.restrict(v, fine.n1d, fine.dim)


def prolong(coarse: GridLevel, v: np.ndarray) -> np.ndarray:
    """Linear / bilinear interpolation onto the next-finer level."""
    v = _check_size(coarse, v)
    return kernels.prolong(v, coarse.n1d, coarse.dim)


def transfer_scale(dim: int) -> float:
    """The constant ``alpha`` in ``P = alpha * R^T``."""
    return 2.0 ** dim


def laplacian_eigenvalues_1d(n1d: int) -> np.ndarray:
    h = 1.0 / (n1d + 1)
    j = np.arange(1, n1d + 1)
    return 4.0 / h ** 2 * np.sin(j * np.pi * h / 2) ** 2


def laplacian_eigenvalues(level: GridLevel) -> np.ndarray:
    """All eigenvalues in mode order; in 2D entry ``(k-1)*n1d + (j-1)`` is ``theta_j + theta_k``."""
    th = laplacian_eigenvalues_1d(level.n1d)
    if level.dim == 1:
        return th
    return (th[:, None] + th[None, :]).reshape(-1)


def sine_mode_1d(n1d: int, j: int) -> np.ndarray:
    h = 1.0 / (n1d + 1)
    l = np.arange(1, n1d + 1)
    return np.sqrt(2 * h) * np.sin(l * j * np.pi * h)


def laplacian_eigenpair(level: GridLevel, index):
    """Analytic eigenpair: ``index`` is ``j`` in 1D or ``(j, k)`` in 2D (1-based).

    The 2D mode ``(j, k)`` is ``v_j(x) * v_k(y)`` with eigenvalue ``theta_j + theta_k``.
    """
    n1d = level.n1d
    th = laplacian_eigenvalues_1d(n1d)
    if level.dim == 1:
        j = int(index)
        if not 1 <= j <= n1d:
            raise IndexError(f"mode index {j} out of range 1..{n1d}")
        return float(th[j - 1]), sine_mode_1d(n1d, j)
    j, k = (int(i) for i in index)
    if not (1 <= j <= n1d and 1 <= k <= n1d):
        raise IndexError(f"mode index {(j, k)} out of range 1..{n1d}")
    vec = np.outer(sine_mode_1d(n1d, k), sine_mode_1d(n1d, j)).reshape(-1)
    return float(th[j - 1] + th[k - 1]), vec


def sine_transform(level: GridLevel, v: np.ndarray) -> np.ndarray:
    """Expand in (and synthesize from) the orthonormal sine eigenbasis.

    The transform is symmetric and orthogonal, hence its own inverse.
    Coefficients are laid out like :func:`laplacian_eigenvalues`.
    """
    v = _check_size(level, v)
    if level.dim == 1:
        return dst(v, type=1, norm="ortho")
    u = v.reshape(level.shape)
    return dst(dst(u, type=1, axis=0, norm="ortho"), type=1, axis=1, norm="ortho").reshape(-1)


def dense_laplacian(level: GridLevel) -> np.ndarray:
    """Dense assembly from the stencil definition (test oracle, small grids only)."""
    n1d, h2 = level.n1d, level.h ** 2
    T = (2 * np.eye(n1d) - np.eye(n1d, k=1) - np.eye(n1d, k=-1)) / h2
    if level.dim == 1:
        return T
    I = np.eye(n1d)
    return np.kron(I, T) + np.kron(T, I)


def dense_restriction(fine: GridLevel) -> np.ndarray:
    """Dense full-weighting matrix assembled from the 1D weights ``[1, 2, 1]/4``."""
    nf = fine.n1d
    nc = (nf + 1) // 2 - 1
    R1 = np.zeros((nc, nf))
    for i in range(nc):
        R1[i, 2 * i:2 * i + 3] = (0.25, 0.5, 0.25)
    return R1 if fine.dim == 1 else np.kron(R1, R1)


def dense_prolongation(coarse: GridLevel) -> np.ndarray:
    """Dense interpolation matrix assembled from the 1D weights ``[1/2, 1, 1/2]``."""
    nc = coarse.n1d
    nf = 2 * nc + 1
    P1 = np.zeros((nf, nc))
    for i in range(nc):
        P1[2 * i:2 * i + 3, i] = (0.5, 1.0, 0.5)
    return P1 if coarse.dim == 1 else np.kron(P1, P1)
