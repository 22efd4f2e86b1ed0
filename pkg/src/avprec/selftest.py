"""Small-size invariant checks for every module, runnable from the CLI.

Each check returns ``(ok, detail)``; :func:`selftest` runs them all and
prints one line per check.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np
from scipy import integrate

from . import avmg, chebfilter, grid, krylov, operators, rng, spectral
from .grid import GridHierarchy, GridLevel
from .kernels import available_backends


def quadrature_step_coeffs(alpha: float, m: int) -> np.ndarray:
    """Chebyshev coefficients of the step at ``alpha`` by numerical quadrature.

    With ``x = cos(phi)`` the weighted projection of ``1_{x > alpha}`` onto
    ``T_i`` becomes ``(2/pi) int_0^{arccos alpha} cos(i phi) dphi`` (half that
    for ``i = 0``).
    """
    top = np.arccos(alpha)
    out = np.empty(m)
    for i in range(m):
        val, _ = integrate.quad(lambda p: np.cos(i * p), 0.0, top, epsabs=1e-13, epsrel=1e-13, limit=200)
        out[i] = (1.0 if i == 0 else 2.0) / np.pi * val
    return out


def check_cheb_quadrature(coeffs: Callable = chebfilter.cheb_step_coeffs, m: int = 10, tol: float = 1e-10):
    worst = 0.0
    for alpha in (-0.9, -0.5, 0.0, 0.3, 0.8):
        worst = max(worst, float(np.max(np.abs(coeffs(alpha, m) - quadrature_step_coeffs(alpha, m)))))
    return worst <= tol, f"max |gamma - quadrature| = {worst:.2e}"


def check_cheb_operator(n: int = 64, tol: float = 1e-10):
    # symmetric operator with a known spectrum inside [-c2, b]
    c2, b = 150.0, 900.0
    Q, _ = np.linalg.qr(rng.uniform(9, n * n).reshape(n, n))
    lam = -c2 + (b + c2) * (0.5 + 0.5 * rng.uniform(10, n))
    A = operators.from_matrix((Q * lam) @ Q.T, symmetric=True)
    filt = chebfilter.ChebStepFilter(10, -c2, b)
    counted = operators.CountingOperator(A)
    v = rng.uniform(7, n)
    got = chebfilter.apply_poly_abs(filt, counted, v)
    want = Q @ (filt.abs_scalar(lam) * (Q.T @ v))
    err = np.linalg.norm(got - want) / np.linalg.norm(want)
    ok = err <= tol and counted.count == filt.m
    return ok, f"rel err {err:.2e}, applications {counted.count} (m={filt.m})"


def check_kernels(tol: float = 1e-12):
    worst = 0.0
    for dim, n1d in ((1, 15), (2, 15)):
        lev = GridLevel(dim, n1d)
        v = rng.uniform(3, lev.n)
        worst = max(worst, np.linalg.norm(grid.apply_laplacian(lev, v, 5.0)
                                          - (grid.dense_laplacian(lev) - 5 * np.eye(lev.n)) @ v))
        R = grid.dense_restriction(lev)
        P = grid.dense_prolongation(lev.coarser())
        worst = max(worst, np.max(np.abs(P - grid.transfer_scale(dim) * R.T)))
        worst = max(worst, np.linalg.norm(grid.restrict(lev, v) - R @ v))
        vc = v[: lev.coarser().n]
        worst = max(worst, np.linalg.norm(grid.prolong(lev.coarser(), vc) - P @ vc))
        mods = list(available_backends().values())
        for mod in mods[1:]:
            a = mods[0].apply_stencil(v, n1d, dim, 1.0 / lev.h ** 2, 5.0)
            b = mod.apply_stencil(v, n1d, dim, 1.0 / lev.h ** 2, 5.0)
            worst = max(worst, float(np.max(np.abs(a - b))) / max(1.0, np.max(np.abs(a))))
    return worst <= tol * 1e3, f"max kernel deviation {worst:.2e}; backends {sorted(available_backends())}"


def check_jacobi(tol: float = 1e-9):
    M = rng.uniform(11, 50 * 50).reshape(50, 50)
    M = M + M.T
    lam, V = spectral.jacobi_eigensym(M)
    res = np.linalg.norm(M @ V - V * lam) / np.linalg.norm(M)
    orth = np.linalg.norm(V.T @ V - np.eye(50))
    return res <= tol and orth <= 1e-10, f"residual {res:.2e}, orthogonality {orth:.2e}"


def _random_indefinite(seed: int, n: int, p: int):
    Q, _ = np.linalg.qr(rng.uniform(seed, n * n).reshape(n, n))
    d = 0.5 + np.abs(rng.uniform(seed + 1, n))
    d[:p] *= -1
    return (Q * d) @ Q.T


def check_bounds(pairs: int = 5, n: int = 24):
    viol = 0
    for s in range(pairs):
        A = _random_indefinite(100 + s, n, 1 + s % (n - 1))
        G = rng.uniform(200 + s, n * n).reshape(n, n)
        T = G @ G.T + 0.1 * np.eye(n)
        rep = spectral.preconditioned_spectrum(operators.from_matrix(T, spd=True),
                                               operators.from_matrix(A, symmetric=True))
        viol += rep.bound_violations + spectral.corollary_violations(rep)
    return viol == 0, f"{viol} violations over {pairs} random pairs"


def check_ideal_two_steps():
    A = _random_indefinite(5, 40, 13)
    Aop = operators.from_matrix(A, symmetric=True)
    T = operators.ideal_av_preconditioner(Aop)
    b = rng.uniform(6, 40)
    out = krylov.pminres(Aop, T, b, spec=krylov.SolveSpec(tol=1e-10, metric="residual"))
    return out.converged and out.iterations <= 2, f"{out.iterations} iterations"


def check_two_grid_formula(tol: float = 1e-10):
    c2 = 40.0
    H = GridHierarchy.standard(1, 3, 2, c2)
    P = avmg.AVMGPreconditioner(H, avmg.AVMGConfig(delta=0.5))
    Tm = P.as_operator().materialize()
    Bm = P.levels[1].B.materialize()
    Td = avmg.dense_two_grid_formula(H.fine, c2, 0.5 * (Bm + Bm.T), P.levels[1].smoother)
    err = np.linalg.norm(Tm - Td)
    return err <= tol * max(1.0, np.linalg.norm(Td)), f"||T_tg - formula||_F = {err:.2e}"


def check_vcycle_spd():
    H = grid.build_hierarchy(2, 4, 200.0)
    Tm = avmg.AVMGPreconditioner(H).as_operator().materialize()
    asym = np.linalg.norm(Tm - Tm.T) / np.linalg.norm(Tm)
    lmin = float(np.linalg.eigvalsh(0.5 * (Tm + Tm.T))[0])
    return asym <= 1e-10 and lmin > 0, f"asymmetry {asym:.2e}, min eig {lmin:.3e}"


def error_propagation_dense(n1d: int, c2: float, tau: float, nu: int, case: str) -> np.ndarray:
    """Dense ``I - T_tg |A|`` for the 1D two-grid cycle with ``B = L`` or ``B = |A|``."""
    fine = GridLevel(1, n1d)
    L = grid.dense_laplacian(fine)
    lam, V = np.linalg.eigh(L - c2 * np.eye(n1d))
    absA = (V * np.abs(lam)) @ V.T
    B = L if case == "laplacian" else absA
    T = avmg.dense_two_grid_formula(fine, c2, B, avmg.SmootherSpec(tau, nu))
    return np.eye(n1d) - T @ absA


def check_error_propagation(tol: float = 1e-10):
    worst = 0.0
    for n1d in (7, 15):
        h = 1.0 / (n1d + 1)
        c2 = 40.0
        for case, tau in (("laplacian", h ** 2 / 3), ("ideal", h ** 2 / (3 - c2 * h ** 2))):
            G = error_propagation_dense(n1d, c2, tau, 2, case)
            for j in range(1, n1d + 1):
                co = spectral.error_prop_coeffs_1d(j, h, c2, tau, 2, case)
                vj = grid.sine_mode_1d(n1d, j)
                want = co.diag * vj + co.off * grid.sine_mode_1d(n1d, n1d + 1 - j)
                worst = max(worst, float(np.max(np.abs(G @ vj - want))))
    return worst <= tol, f"max coefficient mismatch {worst:.2e}"


def check_smoother_guard():
    try:
        avmg.SmootherSpec(-1e-3, 1)
    except ValueError:
        return True, "negative tau rejected"
    return False, "negative tau accepted"


def check_determinism():
    a = rng.uniform(42, 1000)
    b = rng.uniform(42, 1000)
    return bool(np.array_equal(a, b)) and a.min() >= -1 and a.max() < 1, "same seed, same stream"


def check_size_table():
    from .harness import table_sizes

    want = [961, 961, 3969, 16129, 16129, 961, 961, 3969, 3969, 3969,
            225, 225, 961, 3969, 3969, 225, 225, 961, 961, 961]
    got = [r[2] for r in table_sizes()]
    return got == want, f"{sum(g == w for g, w in zip(got, want))}/20 cells match"


CHECKS = {
    "kernels": check_kernels,
    "jacobi": check_jacobi,
    "cheb-quadrature": check_cheb_quadrature,
    "cheb-operator": check_cheb_operator,
    "interval-bounds": check_bounds,
    "ideal-two-steps": check_ideal_two_steps,
    "two-grid-formula": check_two_grid_formula,
    "vcycle-spd": check_vcycle_spd,
    "error-propagation": check_error_propagation,
    "smoother-guard": check_smoother_guard,
    "rng-determinism": check_determinism,
    "size-table": check_size_table,
}


def selftest(verbose: bool = True) -> bool:
    """Run every check; ``True`` if all pass."""
    all_ok = True
    for name, fn in CHECKS.items():
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, reported like one
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
    return all_ok
