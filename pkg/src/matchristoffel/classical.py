"""
Reference scalar orthogonal polynomials used as ground truth.

Everything is monic unless the name says otherwise and is returned as a
:class:`numpy.polynomial.Polynomial`.  The "alternative" Jacobi family lives on
(0, 1) with weight x^alpha (1 - x)^beta; it is related to the standard Jacobi
polynomials by  p_n^{(a,b)}(x) = 2^n / C(2n+a+b, n) * P_n^{(b,a)}(2x - 1).
"""

from __future__ import annotations

from math import factorial, gamma, pi, sqrt

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

X = Polynomial([0.0, 1.0])


def gbinom(a: float, k: int) -> float:
    """Generalized binomial coefficient C(a, k) for real a and integer k >= 0."""
    out = 1.0
    for i in range(k):
        out *= (a - i) / (i + 1)
    return out


def _monic_from_orthopoly(poly) -> Polynomial:
    c = np.asarray(poly.coeffs, dtype=float)[::-1]
    return Polynomial(c / c[-1])


def chebyshev_t(n: int) -> Polynomial:
    return Polynomial.cast(np.polynomial.Chebyshev.basis(n))


def monic_chebyshev_t(n: int) -> Polynomial:
    """t_n = 2^{1-n} T_n, t_0 = 1."""
    if n == 0:
        return Polynomial([1.0])
    return chebyshev_t(n) * 2.0 ** (1 - n)


def chebyshev_u(n: int) -> Polynomial:
    """Second kind U_n with U_{-1} = 0 (not monic: leading coefficient 2^n)."""
    if n < 0:
        return Polynomial([0.0])
    u_prev, u = Polynomial([1.0]), 2 * X
    if n == 0:
        return u_prev
    for _ in range(n - 1):
        u_prev, u = u, 2 * X * u - u_prev
    return u


def jacobi_alt(n: int, alpha: float, beta: float) -> Polynomial:
    """
    Monic polynomial of degree n orthogonal for x^alpha (1-x)^beta on (0, 1).

    Built from the explicit double-binomial sum
    (1/S_n) sum_k C(n+beta, n-k) C(n+alpha, k) x^{n-k} (x-1)^k
    with S_n = C(2n+alpha+beta, n).
    """
    S = gbinom(2 * n + alpha + beta, n)
    out = Polynomial([0.0])
    for k in range(n + 1):
        out = out + gbinom(n + beta, n - k) * gbinom(n + alpha, k) * X ** (n - k) * (X - 1) ** k
    return out / S


def jacobi_alt_endpoint_ratio(n: int, alpha: float, beta: float, at_one: bool) -> float:
    """p_{n+1}(x0)/p_n(x0) at x0 = 1 (``at_one``) or x0 = 0, in closed form."""
    s = alpha + beta
    rho = (n + s + 1) / ((2 * n + s + 2) * (2 * n + s + 1))
    if at_one:
        return (n + 1 + beta) * rho
    return -(n + 1 + alpha) * rho


def monic_hermite(n: int) -> Polynomial:
    """Monic Hermite for the weight exp(-x^2)."""
    return _monic_from_orthopoly(special.hermite(n)) if n else Polynomial([1.0])


def hermite_norm(k: int) -> float:
    return sqrt(pi) * factorial(k) / 2 ** k


def monic_laguerre(n: int, alpha: float = 0.0) -> Polynomial:
    """Monic generalized Laguerre for the weight x^alpha exp(-x)."""
    return _monic_from_orthopoly(special.genlaguerre(n, alpha)) if n else Polynomial([1.0])


def laguerre_norm(k: int, alpha: float = 0.0) -> float:
    return factorial(k) * gamma(k + 1 + alpha)


def recurrence(base: str, k: int, **params) -> tuple[float, float]:
    """
    (J_{k,k-1}, J_{k,k}) of  x p_k = J_{k,k-1} p_{k-1} + J_{k,k} p_k + p_{k+1}.
    """
    if base == "hermite":
        return k / 2.0, 0.0
    if base == "laguerre":
        a = params.get("alpha", 0.0)
        return k * (k + a), 2 * k + a + 1.0
    if base == "chebyshev1":
        off = 0.0 if k == 0 else (0.5 if k == 1 else 0.25)
        return off, 0.0
    raise ValueError(f"no closed-form recurrence for {base!r}")


def monic_basis(base: str, n: int, **params) -> list[Polynomial]:
    """Monic orthogonal polynomials 0..n-1 of a named scalar base weight."""
    a, b = params.get("alpha", 0.0), params.get("beta", 0.0)
    makers = {
        "lebesgue": lambda k: jacobi_alt(k, 0.0, 0.0),
        "chebyshev1": monic_chebyshev_t,
        "jacobi_alt": lambda k: jacobi_alt(k, a, b),
        "hermite": monic_hermite,
        "laguerre": lambda k: monic_laguerre(k, a),
    }
    return [makers[base](k) for k in range(n)]


def basis_recurrence(basis) -> tuple[np.ndarray, np.ndarray]:
    """
    (beta, gamma) with x b_k = b_{k+1} + beta_k b_k + gamma_k b_{k-1} for a monic
    orthogonal basis, k = 0..len(basis)-2.  Only the top coefficients of each
    b_k enter, so the values carry no cancellation from the full expansions.
    """
    m = len(basis) - 1
    beta, gamma = np.zeros(m), np.zeros(m)
    for k in range(m):
        bk = np.asarray(basis[k].coef, dtype=float) / basis[k].coef[-1]
        nxt = np.asarray(basis[k + 1].coef, dtype=float) / basis[k + 1].coef[-1]
        c = np.concatenate([[0.0], bk])
        c[:len(nxt)] -= nxt
        beta[k] = c[k]
        if k > 0:
            gamma[k] = c[k - 1] - beta[k] * bk[k - 1]
    return beta, gamma


def evaluate_basis(basis, x) -> np.ndarray:
    """b_0(x), ..., b_{n-1}(x) by the three-term recurrence (stable at large |x|)."""
    n = len(basis)
    out = np.zeros(n, dtype=np.result_type(x, float))
    if n == 0:
        return out
    beta, gamma = basis_recurrence(basis)
    out[0] = 1.0
    if n > 1:
        out[1] = (x - beta[0]) * out[0]
    for k in range(1, n - 1):
        out[k + 1] = (x - beta[k]) * out[k] - gamma[k] * out[k - 1]
    return out
