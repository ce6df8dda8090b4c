import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from matchristoffel.biorth import (
    abc_kernel, build_biorthogonal, build_biorthogonal_in_basis, cd_formula_residual, cd_kernel,
    quasidet_polynomial,
)
from matchristoffel.biorth import cd_kernel_at_matrix
from matchristoffel.classical import jacobi_alt, monic_basis
from matchristoffel.errors import InsufficientRows, NotMonic
from matchristoffel.matpoly import MatrixPolynomial, evaluate
from matchristoffel.measures import MatrixMeasure, basis_gram, inner_product, moment_matrix

from oracles import abc_direct, scalar_weight_integral, stieltjes

NONSYM = MatrixPolynomial([np.array([[2.0, 0.5], [-0.3, 1.5]]), np.array([[0.1, 0.2], [0.0, -0.1]])])


def chebyshev_system(n=7, factor=None):
    mu = MatrixMeasure("chebyshev1", p=2, factor=factor)
    return mu, build_biorthogonal(moment_matrix(mu, n + 1), n)


def test_lebesgue_degree_one():
    s = build_biorthogonal(moment_matrix(MatrixMeasure("lebesgue"), 3), 2)
    assert np.allclose(s.P1[1].coeffs, [[[-0.5]], [[1.0]]], rtol=1e-14)
    assert s.H[1][0, 0] == pytest.approx(1 / 12, rel=1e-13)


def test_chebyshev_degree_two():
    s = build_biorthogonal(moment_matrix(MatrixMeasure("chebyshev1"), 3), 2)
    assert np.allclose(np.ravel(s.P1[2].coeffs), [-0.5, 0.0, 1.0], atol=1e-14)


def test_diagonal_measure_decouples():
    F = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    s = build_biorthogonal(moment_matrix(MatrixMeasure("lebesgue", 2, {}, F), 5), 4)
    for n in range(5):
        for x in (0.1, 0.6):
            val = evaluate(s.P1[n], x)
            ref = np.diag([jacobi_alt(n, 0, 0)(x), jacobi_alt(n, 1, 0)(x)])
            assert np.allclose(val, ref, atol=1e-9)


@pytest.mark.parametrize("base,params", [("chebyshev1", {}), ("hermite", {}), ("jacobi_alt", {"alpha": 0.5})])
def test_scalar_families_match_stieltjes(base, params):
    s = build_biorthogonal(moment_matrix(MatrixMeasure(base, 1, params), 7), 6)
    for P, q in zip(s.P1, stieltjes(base, 7, params)):
        assert np.allclose(np.ravel(P.coeffs), q.coef, atol=1e-8)


def test_quasidet_polynomials():
    M = moment_matrix(MatrixMeasure("lebesgue"), 3)
    P1, P2 = quasidet_polynomial(M, 0)
    assert P1.allclose(MatrixPolynomial([np.eye(1)])) and P2.allclose(P1)
    P1, _ = quasidet_polynomial(M, 1)
    assert P1.allclose(build_biorthogonal(M, 1).P1[1], rtol=1e-13)


def test_quasidet_nonsymmetric_matches_factorization():
    mu = MatrixMeasure("chebyshev1", 2, {}, NONSYM)
    M = moment_matrix(mu, 6)
    s = build_biorthogonal(M, 5)
    for n in range(6):
        P1, P2 = quasidet_polynomial(M, n)
        assert P1.allclose(s.P1[n], rtol=1e-9, atol=1e-10)
        assert P2.allclose(s.P2[n], rtol=1e-9, atol=1e-10)


def test_symmetric_families_coincide():
    _, s = chebyshev_system(factor=MatrixPolynomial([np.array([[2.0, 0.5], [0.5, 1.0]])]))
    for P1, P2 in zip(s.P1, s.P2):
        assert P1.allclose(P2, rtol=0, atol=1e-12)


def test_biorthogonality_nonsymmetric():
    mu, s = chebyshev_system(6, NONSYM)
    scale = max(np.max(np.abs(h)) for h in s.H)
    for n in range(7):
        for m in range(7):
            G = inner_product(mu, s.P1[n], s.P2[m])
            ref = s.H[n] if n == m else 0.0
            assert np.max(np.abs(G - ref)) <= 1e-8 * scale


def test_cd_kernel_degree_zero():
    _, s = chebyshev_system()
    assert np.allclose(cd_kernel(s, 0, 0.3, -0.2), np.linalg.inv(s.H[0]))


def test_abc_matches_explicit_inverse_and_cd():
    mu = MatrixMeasure("chebyshev1", 2, {}, NONSYM)
    M = moment_matrix(mu, 7)
    s = build_biorthogonal(M, 6)
    for n in range(6):
        for x, y in ((0.3, -0.7), (0.9, 0.1)):
            ref = abc_direct(M.data, 2, n, x, y)
            assert np.allclose(abc_kernel(M, n, x, y), ref, rtol=1e-9, atol=1e-9)
            assert np.allclose(cd_kernel(s, n, x, y), ref, rtol=1e-9, atol=1e-9)


@given(st.floats(-1, 1), st.floats(-1, 1), st.integers(0, 5))
def test_cd_formula_property(x, y, n):
    _, s = chebyshev_system(7, NONSYM)
    assert cd_formula_residual(s, n, x, y) <= 1e-9


def test_cd_formula_on_diagonal():
    _, s = chebyshev_system()
    assert cd_formula_residual(s, 4, 0.0, 0.0) <= 1e-12


def test_kernel_at_scalar_matrix():
    _, s = chebyshev_system(6, NONSYM)
    a, y = 0.4, -0.2
    assert np.allclose(cd_kernel_at_matrix(s, 4, y, a * np.eye(2)), cd_kernel(s, 4, a, y), atol=1e-12)


def test_kernel_at_matrix_by_diagonalization():
    _, s = chebyshev_system(4)
    A = np.array([[0.0, -1.0], [-1.0, 0.0]])
    Q = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    y = 0.35
    qs = stieltjes("chebyshev1", 4)
    h = [scalar_weight_integral("chebyshev1", lambda t, q=q: q(t) ** 2) for q in qs]

    def k_scalar(lam):
        return sum(q(y) * q(lam) / hm for q, hm in zip(qs, h))

    ref = Q @ np.diag([k_scalar(-1.0), k_scalar(1.0)]) @ Q.T
    assert np.allclose(cd_kernel_at_matrix(s, 3, y, A), ref, rtol=1e-10, atol=1e-12)


def test_orthogonal_basis_route_agrees():
    mu = MatrixMeasure("lebesgue", p=2, factor=MatrixPolynomial([np.array([[1.0, 0.2], [0.2, 1.0]])]))
    basis = monic_basis("lebesgue", 7)
    a = build_biorthogonal_in_basis(basis_gram(mu, basis, 7), basis, 6)
    b = build_biorthogonal(moment_matrix(mu, 7), 6)
    for n in range(7):
        assert np.allclose(a.H[n], b.H[n], rtol=1e-7)
        assert a.P1[n].allclose(b.P1[n], rtol=1e-6, atol=1e-7)
    for n in range(6):
        assert cd_formula_residual(a, n, 0.3, 0.8) <= 1e-9


def test_basis_must_be_monic():
    mu = MatrixMeasure("lebesgue")
    basis = [Polynomial([1.0]), Polynomial([0.0, 2.0])]
    with pytest.raises(NotMonic):
        build_biorthogonal_in_basis(basis_gram(mu, basis, 2), basis, 1)


def test_insufficient_rows():
    with pytest.raises(InsufficientRows):
        build_biorthogonal(moment_matrix(MatrixMeasure("lebesgue"), 3), 3)


def test_jacobi_matrix_is_tridiagonal():
    _, s = chebyshev_system(6)
    J = s.jacobi_matrix()
    p = 2
    for k in range(J.shape[0] // p):
        for l in range(J.shape[1] // p):
            if abs(k - l) > 1:
                assert np.max(np.abs(J[k * p:(k + 1) * p, l * p:(l + 1) * p])) <= 1e-10
