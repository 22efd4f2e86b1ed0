"""Outer Krylov solvers with a common stopping rule and history format.

``history[0]`` is the metric at ``x0`` and ``history[i]`` the metric after
iteration ``i``; a run converges once ``history[i] <= tol * history[0]``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotSPDError
from .operators import LinearOperator, identity

ERROR = "error-2norm"
TNORM = "preconditioned-residual-T-norm"
RESIDUAL = "residual-2norm"
_METRIC_ALIASES = {"error": ERROR, "tnorm": TNORM, "residual": RESIDUAL,
                   ERROR: ERROR, TNORM: TNORM, RESIDUAL: RESIDUAL}


@dataclass(frozen=True)
class SolveSpec:
    """Stopping rule and solver options (``restart`` and ``side`` are GMRES-only)."""

    tol: float = 1e-8
    metric: str = ERROR
    maxit: int = 1000
    restart: int = 20
    side: str = "left"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.maxit < 1:
            raise ValueError(f"maxit must be >= 1, got {self.maxit}")
        if self.restart < 1:
            raise ValueError(f"restart must be >= 1, got {self.restart}")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.metric not in _METRIC_ALIASES:
            raise ValueError(f"unknown metric {self.metric!r}")
        object.__setattr__(self, "metric", _METRIC_ALIASES[self.metric])


@dataclass
class KrylovOutcome:
    converged: bool
    iterations: int
    history: list
    x: np.ndarray = field(repr=False)
    wall_time: float = 0.0
    breakdown: bool = False
    message: str = ""

    def __post_init__(self):
        self.history = [float(v) for v in self.history]
        self.converged = bool(self.converged)

    @property
    def final_metric(self) -> float:
        return self.history[-1]

    @property
    def reduction(self) -> float:
        return self.history[-1] / self.history[0] if self.history[0] > 0 else 0.0


class _Metric:
    """Evaluates the stopping metric for a candidate iterate."""

    def __init__(self, kind, A, b, x_true, T=None):
        if kind == ERROR and x_true is None:
            raise ValueError("the error-2norm metric needs the exact solution x_true")
        self.kind, self.A, self.b, self.x_true, self.T = kind, A, b, x_true, T

    def __call__(self, x, r=None):
        if self.kind == ERROR:
            return float(np.linalg.norm(self.x_true - x))
        if r is None:
            r = self.b - self.A(x)
        if self.kind == RESIDUAL:
            return float(np.linalg.norm(r))
        rtr = float(r @ self.T(r))
        if rtr < 0:
            raise NotSPDError("preconditioned residual norm is undefined: (r, T r) < 0")
        return float(np.sqrt(rtr))


def _check_dims(A, b, x0, *ops):
    n = A.n
    if b.shape != (n,) or x0.shape != (n,):
        raise ValueError(f"dimension mismatch: A is {n}x{n}, b {b.shape}, x0 {x0.shape}")
    for op in ops:
        if op.n != n:
            raise ValueError(f"dimension mismatch: operator {op.name} has n={op.n}, A has n={n}")


def pminres(A: LinearOperator, T: LinearOperator, b, x0=None, spec: SolveSpec = SolveSpec(),
            x_true=None) -> KrylovOutcome:
    """Preconditioned MINRES: minimizes ``||b - A x||_T`` over ``x0 + K_i(TA, T r0)``.

    Lanczos on ``TA`` in the ``T^{-1}`` inner product, with Givens QR of the
    tridiagonal matrix; stores a fixed number of vectors.

    Raises
    ------
    NotSPDError
        If the preconditioner produces ``(r, T r) <= 0`` during the Lanczos process.
    """
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    _check_dims(A, b, x, T)
    metric = _Metric(spec.metric, A, b, x_true, T)

    r1 = b - A(x)
    y = T(r1)
    beta1 = float(r1 @ y)
    if beta1 < 0:
        raise NotSPDError(f"preconditioner {T.name} is not SPD: (r, T r) = {beta1:.3e} < 0")
    beta1 = np.sqrt(beta1)
    history = [beta1 if spec.metric == TNORM else metric(x, r1)]
    if history[0] == 0.0:
        return KrylovOutcome(True, 0, history, x, time.perf_counter() - t0)
    target = spec.tol * history[0]

    r2 = r1
    oldb, beta, dbar, epsln, phibar = 0.0, beta1, 0.0, 0.0, beta1
    cs, sn = -1.0, 0.0
    w = np.zeros_like(b)
    w2 = np.zeros_like(b)
    eps = np.finfo(float).eps
    for itn in range(1, spec.maxit + 1):
        v = y / beta
        y = A(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = T(r2)
        oldb = beta
        beta = float(r2 @ y)
        if beta < 0:
            raise NotSPDError(f"preconditioner {T.name} is not SPD: (r, T r) = {beta:.3e} < 0 at iteration {itn}")
        beta = np.sqrt(beta)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), eps)
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        m = phibar if spec.metric == TNORM else metric(x)
        history.append(m)
        if m <= target:
            return KrylovOutcome(True, itn, history, x, time.perf_counter() - t0)
        if beta <= eps * beta1:
            # Lanczos breakdown: the Krylov space is invariant, x is final
            return KrylovOutcome(m <= target, itn, history, x, time.perf_counter() - t0,
                                 breakdown=True, message="Lanczos breakdown")
    return KrylovOutcome(False, spec.maxit, history, x, time.perf_counter() - t0,
                         message="maximum iterations reached")


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0, a
    r = np.hypot(a, b)
    return a / r, b / r, r


def gmres_restarted(A: LinearOperator, Prec: Optional[LinearOperator], b, x0=None,
                    spec: SolveSpec = SolveSpec(), x_true=None) -> KrylovOutcome:
    """GMRES(k) with modified Gram-Schmidt Arnoldi, restarting every ``spec.restart`` steps.

    Left preconditioning minimizes ``||Prec (b - A x)||_2``; right
    preconditioning minimizes ``||b - A x||_2`` over ``x0 + Prec K``. The
    metric is checked after every inner step; ``iterations`` counts inner steps.
    """
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    n = b.size
    M = identity(n) if Prec is None else Prec
    _check_dims(A, b, x, M)
    metric = _Metric(spec.metric, A, b, x_true, M)
    left = spec.side == "left"
    k = spec.restart

    history = [metric(x)]
    if history[0] == 0.0:
        return KrylovOutcome(True, 0, history, x, time.perf_counter() - t0)
    target = spec.tol * history[0]
    # Givens estimate equals the monitored quantity only for right preconditioning + residual metric
    use_estimate = (not left) and spec.metric == RESIDUAL

    # one Krylov basis reused across restarts keeps storage at k + O(1) vectors
    V = np.empty((k + 1, n))
    H = np.empty((k + 1, k))
    cs = np.empty(k)
    sn = np.empty(k)
    g = np.empty(k + 1)
    its = 0
    while its < spec.maxit:
        r = b - A(x)
        z = M(r) if left else r
        beta = float(np.linalg.norm(z))
        if beta == 0.0:
            history.append(metric(x))
            its += 1
            return KrylovOutcome(history[-1] <= target, its, history, x, time.perf_counter() - t0)
        H[:] = 0.0
        g[:] = 0.0
        g[0] = beta
        V[0] = z / beta
        x_cycle = x
        happy = False
        for j in range(k):
            wv = M(A(V[j])) if left else A(M(V[j]))
            for i in range(j + 1):
                H[i, j] = float(V[i] @ wv)
                wv -= H[i, j] * V[i]
            H[j + 1, j] = float(np.linalg.norm(wv))
            happy = H[j + 1, j] <= 1e-14 * beta
            if not happy:
                V[j + 1] = wv / H[j + 1, j]
            for i in range(j):
                tmp = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = tmp
            cs[j], sn[j], H[j, j] = _givens(H[j, j], H[j + 1, j])
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            its += 1

            if use_estimate and not happy and abs(g[j + 1]) > target and its < spec.maxit and j < k - 1:
                history.append(abs(g[j + 1]))
                continue
            yv = _back_substitute(H, g, j + 1)
            dx = yv @ V[:j + 1]
            x_cycle = x + (dx if left else M(dx))
            m = metric(x_cycle)
            history.append(m)
            if m <= target or happy or its >= spec.maxit:
                break
        x = x_cycle
        if history[-1] <= target:
            return KrylovOutcome(True, its, history, x, time.perf_counter() - t0)
        if happy:
            return KrylovOutcome(False, its, history, x, time.perf_counter() - t0, breakdown=True,
                                 message="Arnoldi breakdown without reaching the tolerance")
        if not np.isfinite(history[-1]):
            return KrylovOutcome(False, its, history, x, time.perf_counter() - t0, breakdown=True,
                                 message="non-finite iterate")
    return KrylovOutcome(False, its, history, x, time.perf_counter() - t0, message="maximum iterations reached")


def _back_substitute(H, g, m):
    y = np.zeros(m)
    for i in range(m - 1, -1, -1):
        y[i] = (g[i] - H[i, i + 1:m] @ y[i + 1:m]) / H[i, i]
    return y


def bicgstab(A: LinearOperator, Prec: Optional[LinearOperator], b, x0=None, spec: SolveSpec = SolveSpec(),
             x_true=None) -> KrylovOutcome:
    """Bi-CGSTAB on the left-preconditioned system ``Prec A x = Prec b``.

    Breakdown (``rho`` or ``omega`` below 1e-30 relative) ends the run with
    ``converged=False, breakdown=True``.
    """
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    M = identity(b.size) if Prec is None else Prec
    _check_dims(A, b, x, M)
    metric = _Metric(spec.metric, A, b, x_true, M)
    history = [metric(x)]
    if history[0] == 0.0:
        return KrylovOutcome(True, 0, history, x, time.perf_counter() - t0)
    target = spec.tol * history[0]

    def brk(its, msg):
        return KrylovOutcome(False, its, history, x, time.perf_counter() - t0, breakdown=True, message=msg)

    r = M(b - A(x))
    rhat = r.copy()
    rhat_norm = float(np.linalg.norm(rhat))
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    for its in range(1, spec.maxit + 1):
        rho_new = float(rhat @ r)
        if abs(rho_new) <= 1e-30 * rhat_norm * np.linalg.norm(r) or not np.isfinite(rho_new):
            return brk(its - 1, "rho breakdown")
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        v = M(A(p))
        denom = float(rhat @ v)
        if abs(denom) <= 1e-30 * rhat_norm * np.linalg.norm(v):
            return brk(its - 1, "alpha breakdown")
        alpha = rho / denom
        s = r - alpha * v
        t = M(A(s))
        tt = float(t @ t)
        if tt == 0.0:
            x = x + alpha * p
            history.append(metric(x))
            return KrylovOutcome(history[-1] <= target, its, history, x, time.perf_counter() - t0)
        omega = float(t @ s) / tt
        x = x + alpha * p + omega * s
        r = s - omega * t
        m = metric(x)
        history.append(m)
        if m <= target:
            return KrylovOutcome(True, its, history, x, time.perf_counter() - t0)
        if not np.isfinite(m):
            return brk(its, "non-finite iterate")
        if abs(omega) <= 1e-30 * np.linalg.norm(s) / np.sqrt(tt):
            return brk(its, "omega breakdown")
    return KrylovOutcome(False, spec.maxit, history, x, time.perf_counter() - t0, message="maximum iterations reached")
