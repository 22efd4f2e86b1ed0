"""Absolute-value multigrid (AV-MG) preconditioner and the indefinite V-cycle.

Level ``l`` smooths with Richardson's iteration on an SPD ``B_l``, which is
``L_l`` on fine grids (``c*h_l < delta``) and the Chebyshev approximation
``p_m(L_l - c2 I_l)`` of ``|L_l - c2 I_l|`` on coarse grids. The coarsest level
applies ``|L_0 - c2 I_0|^{-1}`` exactly. With ``M_l = I/tau_l`` the pre- and
post-smoothers coincide, so the resulting map is symmetric; it is positive
definite whenever ``tau_l * eig(B_l) < 2`` on every level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import grid
from .chebfilter import ChebStepFilter, poly_abs_operator
from .errors import HierarchyError, SingularShiftError
from .grid import GridHierarchy, GridLevel
from .operators import LinearOperator, factorize, laplacian, shifted_laplacian

LAPLACIAN = "laplacian"
POLY_ABS = "poly_abs"

DELTA_RANGE = (0.05, 0.99)
EARLY_COARSE_CH = 0.5


@dataclass(frozen=True)
class SmootherSpec:
    """Richardson smoother ``w <- w + tau (r - B w)`` applied ``nu`` times."""

    tau: float
    nu: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"smoother step tau must be positive, got {self.tau}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError(f"smoother sweep count nu must be an integer >= 1, got {self.nu}")


def richardson_sweep(B: Callable, spec: SmootherSpec, r: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """``spec.nu`` Richardson sweeps for ``B w = r`` starting from ``w0``."""
    w = np.array(w0, dtype=float)
    for _ in range(spec.nu):
        w += spec.tau * (r - B(w))
    return w


def _stencil_tau(level: GridLevel, c2: float = 0.0) -> float:
    # h^2/5 (2D) or h^2/3 (1D); the shifted form is the |L - c2 I| analogue
    denom = 2 * level.dim + 1 - c2 * level.h ** 2
    if not denom > 0:
        raise ValueError(f"tau rule undefined: {2 * level.dim + 1} - c2*h^2 = {denom:.3g} <= 0 on n1d={level.n1d}")
    return level.h ** 2 / denom


@dataclass(frozen=True)
class AVMGConfig:
    """Parameters of the AV-MG cycle.

    ``tau_fine`` / ``tau_coarse`` override the step rules; each is a callable
    ``(level, c2) -> tau``. ``coarse_solve`` is ``"eig"`` (analytic sine
    basis), ``"dense"`` (dense eigendecomposition) or ``"partial"`` (negative
    eigenpairs only, then a Cholesky solve).
    """

    delta: float = 1.0 / 3.0
    m: int = 10
    nu_fine: int = 1
    nu_coarse: int = 5
    tau_fine: Optional[Callable] = None
    tau_coarse: Optional[Callable] = None
    coarse_solve: str = "eig"
    damping: str = "none"

    def __post_init__(self):
        lo, hi = DELTA_RANGE
        if not lo <= self.delta <= hi:
            raise ValueError(f"switching parameter delta must lie in [{lo}, {hi}], got {self.delta}")
        if self.m < 2:
            raise ValueError(f"polynomial degree m must be >= 2, got {self.m}")
        if self.coarse_solve not in ("eig", "dense", "partial"):
            raise ValueError(f"unknown coarse_solve {self.coarse_solve!r}")

    def smoother(self, level: GridLevel, c2: float, kind: str) -> SmootherSpec:
        if kind == LAPLACIAN:
            tau = self.tau_fine(level, c2) if self.tau_fine else _stencil_tau(level)
            return SmootherSpec(tau, self.nu_fine)
        tau = self.tau_coarse(level, c2) if self.tau_coarse else _stencil_tau(level, c2)
        return SmootherSpec(tau, self.nu_coarse)


def choose_B(hierarchy: GridHierarchy, l: int, delta: float) -> str:
    """``LAPLACIAN`` if ``c*h_l < delta`` else ``POLY_ABS``."""
    return LAPLACIAN if hierarchy.ch(l) < delta else POLY_ABS


class CoarseSolve:
    """Exact coarse solve ``r0 -> f(L_0 - c2 I_0)^{-1} r0``.

    ``absolute=True`` inverts ``|L_0 - c2 I_0|``, otherwise ``L_0 - c2 I_0``.
    """

    def __init__(self, level: GridLevel, c2: float, absolute: bool = True, mode: str = "eig"):
        self.level = level
        self.c2 = float(c2)
        self.absolute = absolute
        self.mode = mode
        t = grid.laplacian_eigenvalues(level) - self.c2
        if np.min(np.abs(t)) < 1e-12 * self.c2:
            raise SingularShiftError(f"coarse operator L_0 - c2 I_0 is singular for c2={c2} (n1d={level.n1d})")
        if mode == "eig":
            self._weights = 1.0 / (np.abs(t) if absolute else t)
        elif mode == "dense":
            fac = factorize(shifted_laplacian(level, self.c2))
            lam = np.abs(fac.eigenvalues) if absolute else fac.eigenvalues
            self._V, self._inv = fac.eigenvectors, 1.0 / lam
        elif mode == "partial":
            if not absolute:
                raise ValueError("partial coarse solve only applies to the absolute value")
            self._cho = scipy.linalg.cho_factor(partial_abs_matrix(level, self.c2))
        else:
            raise ValueError(f"unknown coarse solve mode {mode!r}")

    def __call__(self, r0: np.ndarray) -> np.ndarray:
        if self.mode == "eig":
            return grid.sine_transform(self.level, self._weights * grid.sine_transform(self.level, r0))
        if self.mode == "dense":
            return self._V @ (self._inv * (self._V.T @ r0))
        return scipy.linalg.cho_solve(self._cho, r0)


def partial_abs_matrix(level: GridLevel, c2: float) -> np.ndarray:
    """Dense ``A - 2 V_p Lambda_p V_p^T`` (``= |A|``) from the negative eigenpairs only."""
    n1d, dim = level.n1d, level.dim
    A = grid.dense_laplacian(level) - c2 * np.eye(level.n)
    th = grid.laplacian_eigenvalues_1d(n1d)
    if dim == 1:
        pairs = [(j,) for j in range(1, n1d + 1) if th[j - 1] < c2]
    else:
        pairs = [(j, k) for k in range(1, n1d + 1) for j in range(1, n1d + 1) if th[j - 1] + th[k - 1] < c2]
    for idx in pairs:
        theta, v = grid.laplacian_eigenpair(level, idx[0] if dim == 1 else idx)
        A += 2.0 * (c2 - theta) * np.outer(v, v)
    return A


@dataclass
class _LevelSetup:
    level: GridLevel
    A: LinearOperator
    B: LinearOperator
    kind: str
    smoother: SmootherSpec


def _cycle(fine: GridLevel, coarse: GridLevel, B: Callable, spec: SmootherSpec, r: np.ndarray,
           coarse_fn: Callable, trace: Optional[dict] = None) -> np.ndarray:
    """Presmooth from zero, correct from the coarse grid, postsmooth."""
    w = richardson_sweep(B, spec, r, np.zeros_like(r))
    rc = grid.restrict(fine, r - B(w))
    wc = coarse_fn(rc)
    w = w + grid.prolong(coarse, wc)
    w = richardson_sweep(B, spec, r, w)
    if trace is not None:
        key = fine.n1d
        trace.setdefault("presmooth", {}).setdefault(key, 0)
        trace["presmooth"][key] += spec.nu
        trace.setdefault("postsmooth", {}).setdefault(key, 0)
        trace["postsmooth"][key] += spec.nu
        trace.setdefault("transfers", {}).setdefault(key, 0)
        trace["transfers"][key] += 1
    return w


class _VCycle:
    """Shared recursion for the AV-MG and indefinite V-cycles."""

    hierarchy: GridHierarchy
    levels: list
    coarse_solve: CoarseSolve
    spd: bool = False

    def apply(self, r: np.ndarray, trace: Optional[dict] = None) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape != (self.hierarchy.fine.n,):
            raise ValueError(f"expected a fine-grid vector of length {self.hierarchy.fine.n}, got {r.shape}")
        return self._apply_level(self.hierarchy.s, r, trace)

    __call__ = apply

    def _apply_level(self, l: int, r: np.ndarray, trace=None) -> np.ndarray:
        if l == 0:
            if trace is not None:
                trace["coarse"] = trace.get("coarse", 0) + 1
            return self.coarse_solve(r)
        ls = self.levels[l]
        return _cycle(ls.level, self.hierarchy[l - 1], ls.B, ls.smoother, r,
                      lambda rc: self._apply_level(l - 1, rc, trace), trace)

    def as_operator(self) -> LinearOperator:
        return LinearOperator(self.hierarchy.fine.n, self.apply, True, self.spd, type(self).__name__)

    @property
    def branch_choices(self) -> list:
        """``(n1d, kind)`` for levels 1..s, coarse to fine."""
        return [(ls.level.n1d, ls.kind) for ls in self.levels[1:]]


class AVMGPreconditioner(_VCycle):
    """SPD preconditioner ``T_mg ~ |L - c2 I|^{-1}`` realized by one V-cycle."""

    spd = True

    def __init__(self, hierarchy: GridHierarchy, config: AVMGConfig = AVMGConfig(), check_smoothers: bool = True):
        self.hierarchy = hierarchy
        self.config = config
        c2 = hierarchy.c2
        self.levels = [None]
        for l in range(1, len(hierarchy)):
            lev = hierarchy[l]
            A = shifted_laplacian(lev, c2)
            kind = choose_B(hierarchy, l, config.delta)
            if kind == LAPLACIAN:
                B = laplacian(lev)
                spectrum_of_B = grid.laplacian_eigenvalues(lev)
            else:
                filt = ChebStepFilter.for_level(lev, c2, config.m, config.damping)
                B = poly_abs_operator(filt, A)
                spectrum_of_B = filt.abs_scalar(grid.laplacian_eigenvalues(lev) - c2)
            spec = config.smoother(lev, c2, kind)
            if check_smoothers:
                _check_smoother(lev, kind, spec, spectrum_of_B)
            self.levels.append(_LevelSetup(lev, A, B, kind, spec))
        self.coarse_solve = CoarseSolve(hierarchy.coarse, c2, absolute=True, mode=config.coarse_solve)


def _check_smoother(level: GridLevel, kind: str, spec: SmootherSpec, eig_B: np.ndarray) -> None:
    # SPD of the cycle needs |1 - tau*b| < 1 for every eigenvalue b >= 0 of B,
    # i.e. tau*max(b) < 2. For the Laplacian the eigenvalues are analytic.
    top = spec.tau * float(np.max(eig_B))
    if not top < 2.0:
        raise ValueError(f"Richardson smoother diverges on n1d={level.n1d} ({kind}): tau*max eig(B) = {top:.3f} >= 2")


class IndefiniteMGPreconditioner(_VCycle):
    """Standard V-cycle for ``L - c2 I``: ``B_l = L_l - c2 I_l``, exact coarse solve.

    Symmetric but indefinite; meant for GMRES or Bi-CGSTAB. With
    ``early_coarse`` the coarse solve happens on the finest level with
    ``c*h_l >= 1/2``.
    """

    spd = False

    def __init__(self, hierarchy: GridHierarchy, early_coarse: bool = False, nu: int = 1,
                 tau_rule: Optional[Callable] = None):
        if early_coarse:
            hierarchy = early_coarse_hierarchy(hierarchy)
        self.hierarchy = hierarchy
        self.early_coarse = early_coarse
        c2 = hierarchy.c2
        self.levels = [None]
        for l in range(1, len(hierarchy)):
            lev = hierarchy[l]
            A = shifted_laplacian(lev, c2)
            tau = tau_rule(lev, c2) if tau_rule else _stencil_tau(lev)
            self.levels.append(_LevelSetup(lev, A, A, "shifted", SmootherSpec(tau, nu)))
        self.coarse_solve = CoarseSolve(hierarchy.coarse, c2, absolute=False)
        if c2 <= 0:
            self.spd = True


def early_coarse_hierarchy(hierarchy: GridHierarchy, threshold: float = EARLY_COARSE_CH) -> GridHierarchy:
    """Cut the hierarchy at the finest level with ``c*h_l >= threshold``."""
    for l in range(hierarchy.s, -1, -1):
        if hierarchy.ch(l) >= threshold:
            if l == hierarchy.s:
                raise HierarchyError(f"fine grid already has c*h >= {threshold}; nothing to smooth")
            return hierarchy.truncated(l)
    return hierarchy


def two_grid_apply(precond: _VCycle, r: np.ndarray, B: Optional[Callable] = None,
                   smoother: Optional[SmootherSpec] = None) -> np.ndarray:
    """One two-grid cycle on a two-level preconditioner.

    ``B`` and ``smoother`` default to the fine level's own; passing e.g. a dense
    ``|L - c2 I|`` gives the idealised cycle analysed for reference.
    """
    if len(precond.hierarchy) != 2:
        raise HierarchyError("two_grid_apply needs a two-level hierarchy")
    ls = precond.levels[1]
    return _cycle(ls.level, precond.hierarchy[0], B if B is not None else ls.B,
                  smoother if smoother is not None else ls.smoother, np.asarray(r, dtype=float),
                  precond.coarse_solve)


def avmg_apply(precond: AVMGPreconditioner, r: np.ndarray, trace: Optional[dict] = None) -> np.ndarray:
    return precond.apply(r, trace)


def indefinite_mg_apply(precond: IndefiniteMGPreconditioner, r: np.ndarray, trace: Optional[dict] = None) -> np.ndarray:
    return precond.apply(r, trace)


def coarse_abs_solve(precond: AVMGPreconditioner, r0: np.ndarray) -> np.ndarray:
    return precond.coarse_solve(np.asarray(r0, dtype=float))


def dense_two_grid_formula(fine: GridLevel, c2: float, B: np.ndarray, spec: SmootherSpec) -> np.ndarray:
    """Dense ``S^nu P |L_H - c2 I_H|^{-1} R S^nu + B^{-1} - S^nu B^{-1} S^nu``, ``S = I - tau B``.

    Assembled from the operator definitions, independently of the cycle code.
    """
    coarse = fine.coarser()
    R = grid.dense_restriction(fine)
    P = grid.dense_prolongation(coarse)
    Ac = grid.dense_laplacian(coarse) - c2 * np.eye(coarse.n)
    lam, V = np.linalg.eigh(Ac)
    Ac_abs_inv = (V / np.abs(lam)) @ V.T
    S = np.linalg.matrix_power(np.eye(fine.n) - spec.tau * B, spec.nu)
    Binv = np.linalg.inv(B)
    return S @ P @ Ac_abs_inv @ R @ S + Binv - S @ Binv @ S
