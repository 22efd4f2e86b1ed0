import numpy as np
import pytest
from conftest import random_indefinite
from hypothesis import given, settings, strategies as st

from avprec import avmg, grid, operators, spectral
from avprec.errors import ConvergenceError, NotSPDError
from avprec.selftest import error_propagation_dense


def test_jacobi_small_cases():
    lam, _ = spectral.jacobi_eigensym(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(lam, [1, 2, 3])
    lam, V = spectral.jacobi_eigensym(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(lam, [-1, 1], atol=1e-15)
    with pytest.raises(ValueError):
        spectral.jacobi_eigensym(np.array([[0.0, 1.0], [0.0, 0.0]]))
    G = np.random.default_rng(0).standard_normal((30, 30))
    with pytest.raises(ConvergenceError):
        spectral.jacobi_eigensym(G + G.T, max_sweeps=1)


def test_jacobi_random_50_residual(rs):
    G = rs.standard_normal((50, 50))
    M = G + G.T
    lam, V = spectral.jacobi_eigensym(M)
    assert np.linalg.norm(M @ V - V * lam) <= 1e-9 * np.linalg.norm(M)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(M), atol=1e-10 * np.abs(lam).max())


def test_jacobi_badly_scaled():
    # wide dynamic range used to stall the off-diagonal test
    rs = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rs.standard_normal((24, 24)))
    M = (Q * np.logspace(-3, 5, 24)) @ Q.T
    lam, _ = spectral.jacobi_eigensym(M)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(M), rtol=1e-8, atol=1e-10)


def test_eigensym_dispatch(rs):
    G = rs.standard_normal((70, 70))
    M = G + G.T
    for method in ("auto", "jacobi", "lapack"):
        lam, V = spectral.eigensym(M, method)
        assert np.linalg.norm(M @ V - V * lam) <= 1e-9 * np.linalg.norm(M)
    with pytest.raises(ValueError):
        spectral.eigensym(M, "qr")


def _pair(rs, n, p):
    A = random_indefinite(rs, n, p)
    G = rs.standard_normal((n, n))
    T = G @ G.T + 0.05 * np.eye(n)
    return operators.from_matrix(T, spd=True), operators.from_matrix(A, symmetric=True)


def test_ideal_spectrum(rs):
    A = operators.from_matrix(random_indefinite(rs, 20, 6), symmetric=True)
    rep = spectral.preconditioned_spectrum(operators.ideal_av_preconditioner(A), A)
    np.testing.assert_allclose(rep.mu, 1.0, atol=1e-10)
    np.testing.assert_allclose(np.abs(rep.lam), 1.0, atol=1e-10)
    assert rep.p == 6 and rep.bound_violations == 0
    assert rep.attained_upper == rep.attained_lower == 20
    assert spectral.delta_ratio(operators.ideal_av_preconditioner(A), A) == pytest.approx((1.0, 1.0))
    stats = spectral.cluster_stats(rep, radius=1e-6)
    assert stats["fraction_total"] == 1.0
    assert spectral.cluster_stats(rep, radius=0.0)["fraction_total"] <= 1.0


def test_identity_preconditioner_multisets(rs):
    M = random_indefinite(rs, 8, 3)
    A = operators.from_matrix(M, symmetric=True)
    rep = spectral.preconditioned_spectrum(operators.identity(8), A)
    lam = np.linalg.eigvalsh(M)
    np.testing.assert_allclose(rep.lam, lam, atol=1e-12)
    np.testing.assert_allclose(rep.mu, np.sort(np.abs(lam)), atol=1e-12)
    assert rep.bound_violations == 0


def test_delta_ratio_diagonal():
    A = operators.from_matrix(np.diag([-1.0, 2.0]), symmetric=True)
    T = operators.from_matrix(np.eye(2) / 2.0, spd=True)
    d0, d1 = spectral.delta_ratio(T, A)
    assert (d0, d1) == pytest.approx((0.5, 1.0))


def test_not_spd_preconditioner(rs):
    A = operators.from_matrix(random_indefinite(rs, 6, 2), symmetric=True)
    with pytest.raises(NotSPDError):
        spectral.preconditioned_spectrum(operators.from_matrix(np.diag([1.0, 1, 1, 1, 1, -1])), A)


def test_interval_bounds_formula():
    mu = np.array([1.0, 2.0, 3.0, 4.0])
    lo, up = spectral.interval_bounds(mu, 1)
    np.testing.assert_array_equal(lo, [-4, 1, 2, 3])
    np.testing.assert_array_equal(up, [-1, 2, 3, 4])


@given(st.integers(0, 2 ** 32 - 1), st.integers(4, 40))
@settings(max_examples=30, deadline=None)
def test_bounds_hold_for_random_pairs(seed, n):
    r = np.random.default_rng(seed)
    p = int(r.integers(1, n))
    T, A = _pair(r, n, p)
    rep = spectral.preconditioned_spectrum(T, A)
    assert rep.p == p and rep.p + int((rep.lam > 0).sum()) == n
    assert rep.delta0 <= rep.delta1
    assert rep.bound_violations == 0
    assert spectral.corollary_violations(rep) == 0
    for k in range(2, n + 1):
        assert spectral.cluster_window_excess(rep, k) <= 1e-8 * max(1.0, rep.delta1)


def test_avmg_small_corollary_inclusion():
    H = grid.build_hierarchy(2, 5, 300.0)
    T = avmg.AVMGPreconditioner(H).as_operator()
    rep = spectral.preconditioned_spectrum(T, operators.shifted_laplacian(H.fine, 300.0))
    assert rep.bound_violations == 0 and spectral.corollary_violations(rep) == 0


def test_error_prop_zero_shift_simplification():
    h, tau, nu = 1 / 16, (1 / 16) ** 2 / 3, 2
    for j in range(1, 8):
        co = spectral.error_prop_coeffs_1d(j, h, 0.0, tau, nu, "laplacian")
        th = 4 / h ** 2 * np.sin(j * np.pi * h / 2) ** 2
        thH = 4 / (2 * h) ** 2 * np.sin(j * np.pi * h) ** 2
        cj4 = np.cos(j * np.pi * h / 2) ** 4
        assert co.beta == 0
        assert co.g11 == pytest.approx((1 - tau * th) ** (2 * nu) * (1 - cj4 * th / thH), rel=1e-12, abs=1e-14)


def test_error_prop_middle_mode():
    h, c2 = 1 / 16, 40.0
    tau = h ** 2 / (3 - c2 * h ** 2)
    co = spectral.error_prop_coeffs_1d(8, h, c2, tau, 2, "ideal")
    t = 4 / h ** 2 * np.sin(8 * np.pi * h / 2) ** 2 - c2
    assert co.g == pytest.approx((1 - tau * abs(t)) ** 4) and co.off == 0


def test_error_prop_beta_only_below_shift():
    h, c2 = 1 / 16, 40.0
    co1 = spectral.error_prop_coeffs_1d(1, h, c2, h ** 2 / 3, 1, "laplacian")
    th1 = 4 / h ** 2 * np.sin(np.pi * h / 2) ** 2
    assert th1 < c2 and co1.beta == pytest.approx(2 * (c2 - th1))
    assert spectral.error_prop_coeffs_1d(5, h, c2, h ** 2 / 3, 1, "laplacian").beta == 0


def test_error_prop_hypotheses():
    with pytest.raises(ValueError):
        spectral.error_prop_coeffs_1d(1, 1 / 8, 200.0, 1e-3, 1, "laplacian")
    with pytest.raises(ValueError):
        spectral.error_prop_coeffs_1d(1, 1 / 8, 70.0, 1e-3, 1, "ideal")
    with pytest.raises(IndexError):
        spectral.error_prop_coeffs_1d(8, 1 / 8, 10.0, 1e-3, 1, "ideal")
    with pytest.raises(ValueError):
        spectral.error_prop_coeffs_1d(1, 1 / 8, 10.0, 1e-3, 1, "poly")


@pytest.mark.parametrize("n1d", [7, 15])
@pytest.mark.parametrize("case", ["laplacian", "ideal"])
def test_error_prop_matches_dense_cycle(n1d, case):
    h, c2, nu = 1 / (n1d + 1), 40.0, 2
    tau = h ** 2 / 3 if case == "laplacian" else h ** 2 / (3 - c2 * h ** 2)
    G = error_propagation_dense(n1d, c2, tau, nu, case)
    for j in range(1, n1d + 1):
        co = spectral.error_prop_coeffs_1d(j, h, c2, tau, nu, case)
        want = co.diag * grid.sine_mode_1d(n1d, j) + co.off * grid.sine_mode_1d(n1d, n1d + 1 - j)
        np.testing.assert_allclose(G @ grid.sine_mode_1d(n1d, j), want, atol=1e-10)
