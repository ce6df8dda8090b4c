"""
Independent reference computations used by the tests.

None of these go through the package's factorization or quadrature code:
integrals use adaptive ``scipy.integrate.quad``, Schur complements use an
explicit inverse, and scalar orthogonal polynomials come from the discretized
Stieltjes procedure or trigonometric closed forms.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate


def quad_integral(f, a, b, weight=None, wvar=None):
    """Adaptive integral of a scalar function, optionally with an algebraic endpoint weight."""
    if weight is None:
        val, _ = integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
    else:
        val, _ = integrate.quad(f, a, b, weight=weight, wvar=wvar, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def scalar_weight_integral(base: str, f, params=None) -> float:
    """int f(x) w(x) dx for the named weights, by adaptive quadrature."""
    params = params or {}
    if base == "lebesgue":
        return quad_integral(f, 0.0, 1.0)
    if base == "chebyshev1":
        return quad_integral(f, -1.0, 1.0, weight="alg", wvar=(-0.5, -0.5))
    if base == "jacobi_alt":
        a, b = params.get("alpha", 0.0), params.get("beta", 0.0)
        return quad_integral(f, 0.0, 1.0, weight="alg", wvar=(a, b))
    if base == "hermite":
        return quad_integral(lambda x: f(x) * np.exp(-x * x), -np.inf, np.inf)
    if base == "laguerre":
        a = params.get("alpha", 0.0)
        return quad_integral(lambda x: f(x) * x ** a * np.exp(-x), 0.0, np.inf)
    raise ValueError(base)


def matrix_integral(base: str, fn, p: int, params=None) -> np.ndarray:
    """Entrywise adaptive integral of a p x p matrix valued function."""
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            out[i, j] = scalar_weight_integral(base, lambda x: fn(x)[i, j], params)
    return out


def schur_quasidet(M: np.ndarray, p: int) -> np.ndarray:
    """D - C A^{-1} B with an explicit inverse."""
    if M.shape[0] == p:
        return M.copy()
    A, B, C, D = M[:-p, :-p], M[:-p, -p:], M[-p:, :-p], M[-p:, -p:]
    return D - C @ np.linalg.inv(A) @ B


def lebesgue_perturbed_moment(n: int, a: float) -> float:
    """int_0^1 x^n (x - a) dx."""
    return 1.0 / (n + 2) - a / (n + 1)


def stieltjes(base: str, n: int, params=None, nodes: int = 200) -> list[Polynomial]:
    """
    Monic orthogonal polynomials 0..n-1 by the discretized Stieltjes procedure
    on a high-order scipy Gauss rule of the weight.
    """
    from scipy.special import roots_chebyt, roots_hermite, roots_jacobi, roots_genlaguerre, roots_legendre

    params = params or {}
    if base == "lebesgue":
        x, w = roots_legendre(nodes)
        x, w = (x + 1) / 2, w / 2
    elif base == "chebyshev1":
        x, w = roots_chebyt(nodes)
    elif base == "jacobi_alt":
        a, b = params.get("alpha", 0.0), params.get("beta", 0.0)
        x, w = roots_jacobi(nodes, b, a)
        x, w = (x + 1) / 2, w / 2 ** (a + b + 1)
    elif base == "hermite":
        x, w = roots_hermite(nodes)
    elif base == "laguerre":
        x, w = roots_genlaguerre(nodes, params.get("alpha", 0.0))
    else:
        raise ValueError(base)
    polys = [Polynomial([1.0])]
    prev = Polynomial([0.0])
    vals_prev = np.zeros_like(x)
    vals = np.ones_like(x)
    norm_prev = None
    for _ in range(n - 1):
        norm = np.sum(w * vals * vals)
        beta = np.sum(w * x * vals * vals) / norm
        gamma = 0.0 if norm_prev is None else norm / norm_prev
        nxt = Polynomial([-beta, 1.0]) * polys[-1] - gamma * prev
        vals_prev, vals = vals, (x - beta) * vals - gamma * vals_prev
        prev = polys[-1]
        polys.append(nxt)
        norm_prev = norm
    return polys


def chebyshev_u_trig(n: int, x: float) -> float:
    """U_n(cos t) = sin((n+1)t)/sin t for |x| < 1."""
    if n < 0:
        return 0.0
    t = np.arccos(x)
    return np.sin((n + 1) * t) / np.sin(t)


def exp_moment_series(n: int, s: float, terms: int = 30) -> float:
    """int_0^1 x^n e^{s x} dx as sum_k s^k / (k! (n+k+1))."""
    return sum(s ** k / (factorial(k) * (n + k + 1)) for k in range(terms))


def abc_direct(M: np.ndarray, p: int, n: int, x, y) -> np.ndarray:
    """[I, I x, ..., I x^n] M_[n+1]^{-1} [I, I y, ..., I y^n]^T with an explicit inverse."""
    X = np.hstack([np.eye(p) * x ** k for k in range(n + 1)])
    Y = np.hstack([np.eye(p) * y ** k for k in range(n + 1)])
    Mn = M[:(n + 1) * p, :(n + 1) * p]
    return Y @ np.linalg.inv(Mn) @ X.T


def jordan_pair(x1: float, Mj: np.ndarray) -> np.ndarray:
    """A = Mj [[x1, 1], [0, x1]] Mj^{-1}."""
    return Mj @ np.array([[x1, 1.0], [0.0, x1]]) @ np.linalg.inv(Mj)
