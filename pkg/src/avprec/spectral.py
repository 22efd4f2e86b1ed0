"""Dense spectral checks: eigensolver, spectra of ``TA`` and ``T|A|``, interval
bounds, clustering, and closed-form 1D two-grid error propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DenseGuardError, NotSPDError
from .operators import DENSE_GUARD, LinearOperator, dense_absolute_value

JACOBI_GUARD = 4096
JACOBI_AUTO_MAX = 64
ATTAIN_RTOL = 1e-8
BOUND_RTOL = 1e-8


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def jacobi_eigensym(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol * ||M||_F``.
    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (columns).
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > JACOBI_GUARD:
        raise DenseGuardError(f"Jacobi eigensolver guard exceeded: n={n} > {JACOBI_GUARD}")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > 1e-10 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    thresh = tol * scale
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # Rutishauser's stable rotation
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-20 * abs(diff):
                    # theta^2 would overflow; t ~ 1/(2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q]
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :]
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    else:
        off = _off_norm(A)
        if off > thresh:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.2e})")
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def eigensym(M: np.ndarray, method: str = "auto"):
    """Symmetric eigendecomposition: ``"jacobi"``, ``"lapack"`` or ``"auto"``.

    ``auto`` uses Jacobi up to ``JACOBI_AUTO_MAX`` and LAPACK above.
    """
    n = M.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_AUTO_MAX else "lapack"
    if method == "jacobi":
        return jacobi_eigensym(M)
    if method == "lapack":
        M = np.asarray(M, dtype=float)
        return np.linalg.eigh(0.5 * (M + M.T))
    raise ValueError(f"unknown eigensolver {method!r}")


def eigvalsym(M: np.ndarray, method: str = "auto") -> np.ndarray:
    """Ascending eigenvalues only; LAPACK skips the eigenvectors."""
    if method == "auto":
        method = "jacobi" if M.shape[0] <= JACOBI_AUTO_MAX else "lapack"
    if method == "lapack":
        M = np.asarray(M, dtype=float)
        return np.linalg.eigvalsh(0.5 * (M + M.T))
    return eigensym(M, method)[0]


@dataclass
class SpectralReport:
    """Spectra of ``T|A|`` (``mu``) and ``TA`` (``lam``), sorted ascending."""

    mu: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    p: int
    delta0: float
    delta1: float
    bound_violations: int
    attained_upper: int
    attained_lower: int
    max_bound_excess: float

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def ratio(self) -> float:
        return self.delta1 / self.delta0

    def summary(self) -> dict:
        return {
            "n": self.n, "p": self.p, "delta0": self.delta0, "delta1": self.delta1, "ratio": self.ratio,
            "bound_violations": self.bound_violations, "attained_upper": self.attained_upper,
            "attained_lower": self.attained_lower,
        }


def interval_bounds(mu: np.ndarray, p: int):
    """Lower and upper bounds on each sorted eigenvalue of ``TA`` from the sorted ``mu``.

    For ``j <= p``: ``-mu_{n-j+1} <= lam_j <= -mu_{p-j+1}``; for ``j > p``:
    ``mu_{j-p} <= lam_j <= mu_j`` (1-based).
    """
    n = mu.size
    lower = np.empty(n)
    upper = np.empty(n)
    j = np.arange(1, n + 1)
    neg = j <= p
    lower[neg] = -mu[n - j[neg]]
    upper[neg] = -mu[p - j[neg]]
    pos = ~neg
    lower[pos] = mu[j[pos] - p - 1]
    upper[pos] = mu[j[pos] - 1]
    return lower, upper


def check_bounds(mu: np.ndarray, lam: np.ndarray, p: Optional[int] = None,
                 tol: float = BOUND_RTOL, attain_rtol: float = ATTAIN_RTOL) -> SpectralReport:
    mu = np.sort(np.asarray(mu, dtype=float))
    lam = np.sort(np.asarray(lam, dtype=float))
    if p is None:
        p = int(np.count_nonzero(lam < 0))
    lower, upper = interval_bounds(mu, p)
    slack = tol * np.max(np.abs(mu))
    excess = np.maximum(lower - lam, lam - upper)
    violations = int(np.count_nonzero(excess > slack))
    up = np.abs(lam - upper) <= attain_rtol * np.maximum(1.0, np.abs(upper))
    lo = np.abs(lam - lower) <= attain_rtol * np.maximum(1.0, np.abs(lower))
    return SpectralReport(mu, lam, p, float(mu[0]), float(mu[-1]), violations, int(up.sum()), int(lo.sum()),
                          float(np.max(excess)))


def _materialize_spd(T: LinearOperator, guard: int) -> np.ndarray:
    if T.n > guard:
        raise DenseGuardError(f"dense materialization requested for n={T.n} > guard {guard}")
    Tm = T.materialize()
    asym = np.linalg.norm(Tm - Tm.T) / max(np.linalg.norm(Tm), np.finfo(float).tiny)
    if asym > 1e-10:
        raise NotSPDError(f"preconditioner {T.name} is not symmetric (relative asymmetry {asym:.2e})")
    return 0.5 * (Tm + Tm.T)


def preconditioned_spectrum(T: LinearOperator, A: LinearOperator, guard: int = DENSE_GUARD,
                            method: str = "auto", abs_A: Optional[np.ndarray] = None) -> SpectralReport:
    """Eigenvalues of ``TA`` and ``T|A|`` through the congruences ``C^T A C`` and ``C^T |A| C``, ``T = C C^T``.

    Raises
    ------
    NotSPDError
        If the Cholesky factorization of ``T`` fails.
    """
    Tm = _materialize_spd(T, guard)
    try:
        C = np.linalg.cholesky(Tm)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"preconditioner {T.name} is not positive definite (Cholesky failed)") from exc
    Am = A.materialize()
    Am = 0.5 * (Am + Am.T)
    if abs_A is None:
        abs_A = dense_absolute_value(A, "full", guard, method)
    lam = eigvalsym(C.T @ Am @ C, method)
    mu = eigvalsym(C.T @ abs_A @ C, method)
    return check_bounds(mu, lam)


def delta_ratio(T: LinearOperator, A: LinearOperator, guard: int = DENSE_GUARD, method: str = "auto"):
    """``(delta0, delta1)``: extreme eigenvalues of ``T|A|``."""
    rep = preconditioned_spectrum(T, A, guard, method)
    return rep.delta0, rep.delta1


def corollary_violations(report: SpectralReport, slack: float = 1e-8) -> int:
    """Eigenvalues of ``TA`` outside ``[-delta1, -delta0] U [delta0, delta1]``."""
    a = np.abs(report.lam)
    return int(np.count_nonzero((a < report.delta0 - slack) | (a > report.delta1 + slack)))


def cluster_window_excess(report: SpectralReport, k: int) -> float:
    """Worst ``spread(lam window) - spread(mu window)`` over all length-``k`` windows of ``mu``.

    Positive windows need ``k >= p + 2``, negative ones ``k >= n - p + 2``;
    a nonpositive result means every applicable window obeys the clustering
    implication of the interval bounds.
    """
    mu, lam, n, p = report.mu, report.lam, report.n, report.p
    worst = -np.inf
    for l in range(1, n - k + 2):
        tau = mu[l + k - 2] - mu[l - 1]
        if k >= p + 2:
            worst = max(worst, (lam[l + k - 2] - lam[l + p - 1]) - tau)
        if k >= n - p + 2:
            lo, hi = n - k - l + 2, p - l + 1
            if 1 <= lo <= hi:
                worst = max(worst, (lam[hi - 1] - lam[lo - 1]) - tau)
    return float(worst)


def cluster_stats(report: SpectralReport, center1: float = -1.0, center2: float = 1.0, radius: float = 0.25) -> dict:
    """Fractions of eigenvalues of ``TA`` within ``radius`` of each center, and the outliers."""
    lam = report.lam
    in1 = np.abs(lam - center1) <= radius
    in2 = np.abs(lam - center2) <= radius
    n = lam.size
    return {
        "fraction_center1": float(in1.sum()) / n,
        "fraction_center2": float(in2.sum()) / n,
        "fraction_total": float((in1 | in2).sum()) / n,
        "outliers": lam[~(in1 | in2)].copy(),
    }


@dataclass(frozen=True)
class ErrorPropCoeffs1D:
    """Action of the two-grid error propagation on the 1D mode ``v_j``.

    ``G v_j = diag * v_j + off * v_{n+1-j}``. For ``j <= N`` the pair is
    ``(g11, g12)``, for ``j = N+1`` only ``g`` (``off = 0``), for ``j >= N+2``
    ``(g21, g22)``. With ``case="ideal"`` the values are the barred
    coefficients of the cycle with ``B = |L - c2 I|``; ``beta`` is then zero.
    """

    j: int
    n: int
    case: str
    g11: Optional[float] = None
    g12: Optional[float] = None
    g: Optional[float] = None
    g21: Optional[float] = None
    g22: Optional[float] = None
    beta: float = 0.0

    @property
    def N(self) -> int:
        return (self.n + 1) // 2 - 1

    @property
    def diag(self) -> float:
        if self.j <= self.N:
            return self.g11
        return self.g if self.j == self.N + 1 else self.g21

    @property
    def off(self) -> float:
        if self.j <= self.N:
            return self.g12
        return 0.0 if self.j == self.N + 1 else self.g22


def error_prop_coeffs_1d(j: int, h: float, c2: float, tau: float, nu: int, case: str = "laplacian") -> ErrorPropCoeffs1D:
    """Closed-form coefficients of the 1D two-grid error propagation on ``v_j``.

    ``case="laplacian"`` is the cycle with ``B = L`` (needs ``c2 < 2/h^2``);
    ``case="ideal"`` the cycle with ``B = |L - c2 I|`` (needs ``c*h < 1``).
    """
    n = int(round(1.0 / h)) - 1
    if n < 3 or n % 2 == 0 or abs((n + 1) * h - 1.0) > 1e-12:
        raise ValueError(f"h={h} does not give an odd grid of at least 3 points")
    if not 1 <= j <= n:
        raise IndexError(f"mode index {j} out of range 1..{n}")
    N = (n + 1) // 2 - 1
    H = 2.0 * h

    def theta(k):
        return 4.0 / h ** 2 * np.sin(k * np.pi * h / 2) ** 2

    def theta_H(k):
        return 4.0 / H ** 2 * np.sin(k * np.pi * H / 2) ** 2

    cj = np.cos(j * np.pi * h / 2) ** 2
    sj = np.sin(j * np.pi * h / 2) ** 2
    th = theta(j)
    tj = th - c2
    jc = n + 1 - j
    tc = theta(jc) - c2

    if case == "laplacian":
        if not c2 < 2.0 / h ** 2:
            raise ValueError("the B = L coefficients need c2 < theta_{N+1} = 2/h^2")
        beta = 2.0 * (c2 - th) if th < c2 else 0.0
        sm = 1.0 - tau * th
        smc = 1.0 - tau * theta(jc)
        if j == N + 1:
            return ErrorPropCoeffs1D(j, n, case, g=sm ** (2 * nu) * abs(tj) / th + c2 / th, beta=beta)
        k = j if j <= N else jc
        tH = abs(theta_H(k) - c2)
        d = sm ** (2 * nu) * (1.0 - cj ** 2 * th / tH) * abs(tj) / th + c2 / th
        o = sm ** nu * sj * cj * abs(tj) / tH * smc ** nu
        if j <= N:
            return ErrorPropCoeffs1D(j, n, case, g11=d - beta / th, g12=o, beta=beta)
        return ErrorPropCoeffs1D(j, n, case, g21=d, g22=o, beta=beta)

    if case == "ideal":
        if not c2 * h ** 2 < 1.0:
            raise ValueError("the ideal-B coefficients need c*h < 1")
        sm = 1.0 - tau * abs(tj)
        smc = 1.0 - tau * abs(tc)
        if j == N + 1:
            return ErrorPropCoeffs1D(j, n, case, g=sm ** (2 * nu))
        k = j if j <= N else jc
        tH = abs(theta_H(k) - c2)
        d = sm ** (2 * nu) * (1.0 - cj ** 2 * abs(tj) / tH)
        o = sm ** nu * sj * cj * abs(tj) / tH * smc ** nu
        if j <= N:
            return ErrorPropCoeffs1D(j, n, case, g11=d, g12=o)
        return ErrorPropCoeffs1D(j, n, case, g21=d, g22=o)

    raise ValueError(f"case must be 'laplacian' or 'ideal', got {case!r}")
