import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matchristoffel.blockmat import apply_poly_shift
from matchristoffel.classical import (
    basis_recurrence, chebyshev_u, evaluate_basis, jacobi_alt, jacobi_alt_endpoint_ratio, monic_basis,
    monic_chebyshev_t, recurrence,
)
from matchristoffel.errors import ConfigError, UnderResolvedQuadrature
from matchristoffel.matpoly import MatrixPolynomial, evaluate
from matchristoffel.measures import (
    MatrixMeasure, basis_gram, inner_product, moment_matrix, moments, perturbed_moment_matrix,
    quadrature_moments, scalar_moment,
)

from oracles import chebyshev_u_trig, matrix_integral, scalar_weight_integral, stieltjes

BASE_PARAMS = [
    ("lebesgue", {}),
    ("chebyshev1", {}),
    ("jacobi_alt", {"alpha": 0.5, "beta": -0.3}),
    ("jacobi_alt", {"alpha": 1.0, "beta": 2.0}),
    ("hermite", {}),
    ("laguerre", {}),
    ("laguerre", {"alpha": 0.5}),
]


@pytest.mark.parametrize("base,params", BASE_PARAMS)
def test_scalar_moments_match_adaptive_integral(base, params):
    for n in range(7):
        ref = scalar_weight_integral(base, lambda x: x ** n, params)
        assert scalar_moment(base, n, params) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_lebesgue_and_chebyshev_moment_examples():
    ms = moments(MatrixMeasure("lebesgue"), 5)
    assert [m[0, 0] for m in ms] == pytest.approx([1, 1 / 2, 1 / 3, 1 / 4, 1 / 5], rel=1e-15)
    ms = moments(MatrixMeasure("chebyshev1"), 3)
    assert [m[0, 0] for m in ms] == pytest.approx([np.pi, 0.0, np.pi / 2], abs=1e-15)
    assert np.allclose(moment_matrix(MatrixMeasure("lebesgue"), 2).data, [[1, 0.5], [0.5, 1 / 3]], rtol=1e-15)
    assert np.allclose(moment_matrix(MatrixMeasure("chebyshev1"), 2).data, [[np.pi, 0], [0, np.pi / 2]])


def test_matrix_factor_moments_by_linearity():
    A = np.array([[0.2, -0.4], [1.1, 0.3]])
    ms = moments(MatrixMeasure("lebesgue", p=2, factor=MatrixPolynomial.linear(A)), 6)
    for k, m in enumerate(ms):
        assert np.allclose(m, np.eye(2) / (k + 2) - A / (k + 1), rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("base,params", BASE_PARAMS[:4])
def test_factor_moments_match_adaptive_integral(base, params):
    F = MatrixPolynomial([np.array([[2.0, 0.3], [0.3, 1.0]]), np.array([[0.0, 0.5], [0.5, 0.0]])])
    mu = MatrixMeasure(base, 2, params, F)
    for k, m in enumerate(moments(mu, 4)):
        ref = matrix_integral(base, lambda x: x ** k * evaluate(F, x), 2, params)
        assert np.allclose(m, ref, rtol=1e-9, atol=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 6))
def test_closed_form_and_quadrature_agree(a, b, n):
    F = MatrixPolynomial([np.array([[3.0, a], [a, 3.0]]), np.array([[b, 0.0], [0.0, -b]])])
    mu = MatrixMeasure("chebyshev1", 2, {}, F)
    for m, q in zip(moments(mu, 2 * n), quadrature_moments(mu, 2 * n)):
        assert np.allclose(m, q, rtol=1e-12, atol=1e-12)


def test_symmetric_factor_gives_symmetric_matrix():
    F = MatrixPolynomial([np.array([[2.0, 0.3], [0.3, 1.0]]), np.array([[0.0, 1.0], [1.0, 0.5]])])
    M = moment_matrix(MatrixMeasure("hermite", 2, {}, F), 4)
    assert np.array_equal(M.data, M.data.T)


def test_identity_perturbation_is_moment_matrix():
    mu = MatrixMeasure("chebyshev1", p=2)
    P = perturbed_moment_matrix(mu, MatrixPolynomial([np.eye(2)]), 4)
    assert np.allclose(P.data, moment_matrix(mu, 4).data, atol=1e-14)


def test_scalar_perturbation_matches_shift():
    a = 0.25
    mu = MatrixMeasure("lebesgue")
    W = MatrixPolynomial([np.array([[-a]]), np.array([[1.0]])])
    direct = perturbed_moment_matrix(mu, W, 4)
    shifted = apply_poly_shift(W, moment_matrix(mu, 5))
    assert np.max(np.abs(direct.data - shifted.data[:4, :4])) <= 1e-12


def test_chebyshev_perturbation_is_symmetric_hankel():
    W = MatrixPolynomial.linear(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    M = perturbed_moment_matrix(MatrixMeasure("chebyshev1", p=2), W, 4)
    assert np.allclose(M.data, M.data.T, atol=1e-14)
    assert M.is_block_hankel(atol=1e-14)


def test_inner_product_matches_adaptive_integral():
    F = MatrixPolynomial([np.array([[2.0, 0.3], [0.3, 1.0]])])
    mu = MatrixMeasure("jacobi_alt", 2, {"alpha": 0.5, "beta": 1.0}, F)
    P = MatrixPolynomial([np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2)])
    Q = MatrixPolynomial([np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(2), np.eye(2)])
    ref = matrix_integral("jacobi_alt", lambda x: evaluate(P, x) @ evaluate(F, x) @ evaluate(Q, x).T, 2,
                          mu.params)
    assert np.allclose(inner_product(mu, P, Q), ref, rtol=1e-10, atol=1e-12)


def test_fixed_rule_too_small_is_rejected():
    with pytest.raises(UnderResolvedQuadrature):
        MatrixMeasure("lebesgue", quad_nodes=2).rule(8)


def test_measure_validation_and_round_trip(tmp_path):
    with pytest.raises(ValueError):
        MatrixMeasure("gauss")
    with pytest.raises(ValueError):
        MatrixMeasure("lebesgue", p=2, factor=MatrixPolynomial([np.eye(3)]))
    with pytest.raises(ConfigError):
        MatrixMeasure.from_dict({"p": 2})
    F = MatrixPolynomial([np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])])
    mu = MatrixMeasure("laguerre", 2, {"alpha": 0.5}, F)
    path = tmp_path / "mu.json"
    path.write_text(json.dumps(mu.to_dict()))
    back = MatrixMeasure.from_json(path)
    assert back.base == "laguerre" and back.params == {"alpha": 0.5} and back.factor.allclose(F)


# -- classical scalar families ------------------------------------------------------

@pytest.mark.parametrize("base,params", BASE_PARAMS)
def test_monic_basis_matches_stieltjes(base, params):
    ours = monic_basis(base, 7, **params)
    ref = stieltjes(base, 7, params)
    for a, b in zip(ours, ref):
        scale = max(1.0, np.max(np.abs(b.coef)))
        assert np.allclose(a.coef, b.coef, rtol=0, atol=1e-10 * scale)


def test_monic_chebyshev_examples():
    assert np.allclose(monic_chebyshev_t(2).coef, [-0.5, 0.0, 1.0])
    assert np.allclose(monic_chebyshev_t(0).coef, [1.0])


@pytest.mark.parametrize("n", range(6))
def test_chebyshev_u_trigonometric(n):
    for x in np.linspace(-0.95, 0.95, 7):
        assert chebyshev_u(n)(x) == pytest.approx(chebyshev_u_trig(n, x), rel=1e-12, abs=1e-12)
    assert chebyshev_u(-1)(0.3) == 0.0


@pytest.mark.parametrize("base,params", [("hermite", {}), ("laguerre", {"alpha": 0.5}), ("chebyshev1", {})])
def test_closed_recurrence_matches_basis(base, params):
    beta, gamma = basis_recurrence(monic_basis(base, 8, **params))
    for k in range(1, 7):
        off, diag = recurrence(base, k, **params)
        assert gamma[k] == pytest.approx(off, rel=1e-10)
        assert beta[k] == pytest.approx(diag, abs=1e-10)


@given(st.floats(-3, 3))
def test_evaluate_basis_matches_expansion(x):
    basis = monic_basis("hermite", 8)
    vals = evaluate_basis(basis, x)
    assert np.allclose(vals, [b(x) for b in basis], rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("alpha,beta", [(-0.3, 0.5), (0.5, 0.5), (1.0, -0.3)])
def test_jacobi_endpoint_ratios(alpha, beta):
    for n in range(5):
        p0, p1 = jacobi_alt(n, alpha, beta), jacobi_alt(n + 1, alpha, beta)
        assert p1(0.0) / p0(0.0) == pytest.approx(jacobi_alt_endpoint_ratio(n, alpha, beta, False), rel=1e-10)
        assert p1(1.0) / p0(1.0) == pytest.approx(jacobi_alt_endpoint_ratio(n, alpha, beta, True), rel=1e-10)


def test_basis_gram_is_diagonal_for_scalar_weight():
    mu = MatrixMeasure("laguerre", p=2)
    basis = monic_basis("laguerre", 6)
    G = basis_gram(mu, basis, 6)
    off = G.data - np.diag(np.diag(G.data))
    assert np.max(np.abs(off)) <= 1e-10 * np.max(np.abs(G.data))
