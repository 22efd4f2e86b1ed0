import numpy as np
import pytest
from numpy.polynomial import chebyshev

from avprec import chebfilter, grid, operators
from avprec.chebfilter import ChebStepFilter, cheb_step_coeffs
from avprec.grid import GridLevel
from avprec.selftest import check_cheb_quadrature, quadrature_step_coeffs


def test_coefficient_examples():
    g = cheb_step_coeffs(0.0, 3)
    assert g[0] == pytest.approx(0.5) and g[1] == pytest.approx(2 / np.pi) and g[2] == pytest.approx(0, abs=1e-16)
    assert cheb_step_coeffs(0.5, 2)[0] == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        cheb_step_coeffs(1.0, 5)


@pytest.mark.parametrize("alpha", [-0.9, -0.5, 0.0, 0.5, 0.9])
def test_coefficients_match_quadrature(alpha):
    np.testing.assert_allclose(cheb_step_coeffs(alpha, 12), quadrature_step_coeffs(alpha, 12), atol=1e-10)


def test_quadrature_check_catches_corrupted_gamma1():
    assert check_cheb_quadrature()[0]

    def corrupted(alpha, m):
        g = cheb_step_coeffs(alpha, m)
        g[1] += 1e-3
        return g

    assert not check_cheb_quadrature(corrupted)[0]


def test_filter_validation():
    with pytest.raises(ValueError):
        ChebStepFilter(1, -1.0, 1.0)
    with pytest.raises(ValueError):
        ChebStepFilter(10, 1.0, 2.0)
    with pytest.raises(ValueError):
        ChebStepFilter(10, -1.0, 2.0, damping="lanczos")
    with pytest.raises(ValueError):
        ChebStepFilter.for_level(GridLevel(2, 7), 0.0, 10)
    f = ChebStepFilter.for_level(GridLevel(2, 7), 100.0, 10)
    assert (f.a, f.b) == (-100.0, 8 * 64 - 100.0)
    assert -1 < f.alpha < 1
    assert ChebStepFilter.for_level(GridLevel(1, 7), 100.0, 10).b == 4 * 64 - 100.0


def _scalar_op(t):
    return operators.from_matrix(np.array([[t]]), symmetric=True)


@pytest.mark.parametrize("t", [-30.0, -1.0, 4.0, 250.0])
def test_step_poly_on_scalar_equals_partial_sum(t):
    f = ChebStepFilter(10, -40.0, 300.0)
    got = chebfilter.apply_step_poly(f, _scalar_op(t), np.array([1.0]))[0]
    assert got == pytest.approx(chebyshev.chebval(f.mapped(t), f.gamma), rel=1e-12, abs=1e-14)


def test_step_poly_large_degree_approximates_step():
    f = ChebStepFilter(200, -40.0, 300.0)
    assert chebfilter.apply_step_poly(f, _scalar_op(150.0), np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-2)
    assert chebfilter.apply_step_poly(f, _scalar_op(-20.0), np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-2)


def test_poly_abs_eigenvector_and_count():
    lev = GridLevel(2, 15)
    c2 = 300.0
    A = operators.CountingOperator(operators.shifted_laplacian(lev, c2))
    f = ChebStepFilter.for_level(lev, c2, 10)
    th, v = grid.laplacian_eigenpair(lev, (3, 4))
    out = chebfilter.apply_poly_abs(f, A, v)
    np.testing.assert_allclose(out, f.abs_scalar(th - c2) * v, atol=1e-12 * abs(th - c2) * 10)
    assert A.count == f.m


def test_poly_abs_matches_eigen_expansion_dense(rs):
    n = 64
    Q, _ = np.linalg.qr(rs.standard_normal((n, n)))
    lam = rs.uniform(-150.0, 900.0, n)
    A = operators.from_matrix((Q * lam) @ Q.T, symmetric=True)
    f = ChebStepFilter(10, -150.0, 900.0)
    v = rs.standard_normal(n)
    want = Q @ (f.abs_scalar(lam) * (Q.T @ v))
    np.testing.assert_allclose(chebfilter.apply_poly_abs(f, A, v), want, rtol=1e-10, atol=1e-10 * np.linalg.norm(want))


def test_poly_abs_symmetric(rs):
    lev = GridLevel(2, 15)
    A = operators.shifted_laplacian(lev, 200.0)
    P = chebfilter.poly_abs_operator(ChebStepFilter.for_level(lev, 200.0, 10), A)
    u, w = rs.standard_normal(lev.n), rs.standard_normal(lev.n)
    assert P(u) @ w == pytest.approx(u @ P(w), rel=1e-10)


def test_relative_error_report():
    lev = GridLevel(2, 31)
    c2 = 1500.0
    f = ChebStepFilter.for_level(lev, c2, 10)
    lo, hi = chebfilter.abs_relative_error(f, grid.laplacian_eigenvalues(lev) - c2)
    assert 0 <= lo <= hi and np.isfinite(hi)


def test_jackson_damping_shrinks_high_coefficients():
    plain = ChebStepFilter(10, -1.0, 3.0)
    damped = ChebStepFilter(10, -1.0, 3.0, damping="jackson")
    assert damped.gamma[0] == pytest.approx(plain.gamma[0])
    assert np.all(np.abs(damped.gamma[1:]) <= np.abs(plain.gamma[1:]) + 1e-15)
