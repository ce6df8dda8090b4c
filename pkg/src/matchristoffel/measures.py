"""
Matrix measures dmu(x) = F(x) w(x) dx built on classical scalar weights.

Moments come from closed forms of the scalar weight (linearity handles the
matrix factor F); perturbed moments are integrated directly with a Gauss rule
for the weight, so the two routes stay independent of each other.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb, gamma, pi

import numpy as np
from scipy import special

from .blockmat import BlockMatrix
from .errors import ConfigError, UnderResolvedQuadrature
from .matpoly import MatrixPolynomial, evaluate

BASES = ("lebesgue", "chebyshev1", "jacobi_alt", "hermite", "laguerre")

SUPPORT = {
    "lebesgue": (0.0, 1.0),
    "chebyshev1": (-1.0, 1.0),
    "jacobi_alt": (0.0, 1.0),
    "hermite": (-np.inf, np.inf),
    "laguerre": (0.0, np.inf),
}


def gauss_rule(base: str, n: int, params: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss rule for the scalar base weight."""
    params = params or {}
    if base == "lebesgue":
        t, w = special.roots_legendre(n)
        return (t + 1) / 2, w / 2
    if base == "chebyshev1":
        return special.roots_chebyt(n)
    if base == "jacobi_alt":
        a, b = params.get("alpha", 0.0), params.get("beta", 0.0)
        t, w = special.roots_jacobi(n, b, a)
        return (t + 1) / 2, w / 2 ** (a + b + 1)
    if base == "hermite":
        return special.roots_hermite(n)
    if base == "laguerre":
        return special.roots_genlaguerre(n, params.get("alpha", 0.0))
    raise ValueError(f"unknown base weight {base!r}")


def scalar_moment(base: str, n: int, params: dict | None = None) -> float:
    """Closed form of int x^n w(x) dx."""
    params = params or {}
    if base == "lebesgue":
        return 1.0 / (n + 1)
    if base == "chebyshev1":
        return 0.0 if n % 2 else pi * comb(n, n // 2) / 2 ** n
    if base == "jacobi_alt":
        a, b = params.get("alpha", 0.0), params.get("beta", 0.0)
        return float(special.beta(n + a + 1, b + 1))
    if base == "hermite":
        return 0.0 if n % 2 else gamma((n + 1) / 2)
    if base == "laguerre":
        return gamma(n + params.get("alpha", 0.0) + 1)
    raise ValueError(f"unknown base weight {base!r}")


@dataclass(frozen=True)
class MatrixMeasure:
    """
    Scalar classical weight times an optional matrix polynomial factor.

    Attributes
    ----------
    base : str
        One of ``lebesgue`` (on [0,1]), ``chebyshev1``, ``jacobi_alt``,
        ``hermite``, ``laguerre``.
    params : dict
        ``alpha``/``beta`` where the base needs them.
    p : int
        Block size.
    factor : MatrixPolynomial or None
        F(x); ``None`` means F = I_p.
    quad_nodes : int or None
        Fixed node count; by default chosen from the requested degree.
    """

    base: str
    p: int = 1
    params: dict = field(default_factory=dict)
    factor: MatrixPolynomial | None = None
    quad_nodes: int | None = None

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base weight {self.base!r}")
        if self.factor is not None and self.factor.p != self.p:
            raise ValueError("factor block size does not match p")

    @property
    def support(self) -> tuple[float, float]:
        return SUPPORT[self.base]

    @property
    def factor_degree(self) -> int:
        return 0 if self.factor is None else len(self.factor.coeffs) - 1

    def factor_poly(self) -> MatrixPolynomial:
        return self.factor if self.factor is not None else MatrixPolynomial([np.eye(self.p)])

    def is_symmetric(self) -> bool:
        return all(np.array_equal(c, c.T) for c in self.factor_poly().coeffs)

    def rule(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss rule exact for polynomial integrands of total degree ``degree``."""
        n = self.quad_nodes if self.quad_nodes is not None else degree // 2 + 8
        if 2 * n - 1 < degree:
            raise UnderResolvedQuadrature(
                f"{n}-point rule integrates degree {2 * n - 1} < {degree}")
        return gauss_rule(self.base, n, self.params)

    def density(self, x) -> np.ndarray:
        """F(x) at a scalar point (the scalar weight is carried by the rule)."""
        return evaluate(self.factor_poly(), x)

    def integrate(self, fn, degree: int, nodes: int | None = None) -> np.ndarray:
        """
        sum_i w_i fn(x_i) F(x_i)-weighted integrand; ``fn(x, Fx)`` returns the
        integrand given the node and the factor value there.
        """
        if nodes is None:
            xs, ws = self.rule(degree)
        else:
            xs, ws = gauss_rule(self.base, nodes, self.params)
        total = None
        for x, w in zip(xs, ws):
            term = w * fn(x, self.density(x))
            total = term if total is None else total + term
        return total

    def to_dict(self) -> dict:
        out = {"base": self.base, "params": dict(self.params), "p": self.p}
        if self.factor is not None:
            out["factor"] = {"coeffs": [np.asarray(c).tolist() for c in self.factor.coeffs]}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MatrixMeasure":
        try:
            base = d["base"]
            p = int(d.get("p", 1))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad measure description: {exc}") from exc
        factor = None
        if d.get("factor"):
            factor = MatrixPolynomial([np.array(c, dtype=float) for c in d["factor"]["coeffs"]])
            if factor.p != p:
                raise ConfigError(f"factor block size {factor.p} does not match p={p}")
        return cls(base, p, dict(d.get("params", {})), factor, d.get("quad_nodes"))

    @classmethod
    def from_json(cls, path) -> "MatrixMeasure":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def moments(measure: MatrixMeasure, count: int) -> list[np.ndarray]:
    """m_k = int x^k F(x) w(x) dx, k < count, from scalar closed forms."""
    F = measure.factor_poly().coeffs
    out = []
    for k in range(count):
        m = np.zeros((measure.p, measure.p))
        for j, Fj in enumerate(F):
            m = m + Fj * scalar_moment(measure.base, k + j, measure.params)
        out.append(m)
    return out


def quadrature_moments(measure: MatrixMeasure, count: int,
                       W: MatrixPolynomial | None = None) -> list[np.ndarray]:
    """m_k = int x^k W(x) F(x) w(x) dx by the Gauss rule of the base weight."""
    degW = 0 if W is None else len(W.coeffs) - 1
    degree = count - 1 + degW + measure.factor_degree
    xs, ws = measure.rule(degree)
    p = measure.p
    dtype = float if W is None else np.result_type(W.coeffs[0], float)
    out = [np.zeros((p, p), dtype=dtype) for _ in range(count)]
    for x, w in zip(xs, ws):
        base = measure.density(x)
        if W is not None:
            base = evaluate(W, x) @ base
        xp = 1.0
        for k in range(count):
            out[k] = out[k] + (w * xp) * base
            xp *= x
    return out


def hankel(ms: list[np.ndarray], n_blocks: int) -> BlockMatrix:
    p = ms[0].shape[0]
    data = np.zeros((n_blocks * p, n_blocks * p), dtype=np.result_type(*ms))
    for k in range(n_blocks):
        for l in range(n_blocks):
            data[k * p:(k + 1) * p, l * p:(l + 1) * p] = ms[k + l]
    return BlockMatrix(p, data)


def moment_matrix(measure: MatrixMeasure, n_blocks: int) -> BlockMatrix:
    """Block Hankel truncation M_[n] with block (k,l) = m_{k+l}."""
    return hankel(moments(measure, 2 * n_blocks - 1), n_blocks)


def perturbed_moment_matrix(measure: MatrixMeasure, W: MatrixPolynomial, n_blocks: int) -> BlockMatrix:
    """Moment matrix of W(x) dmu(x), integrated directly by quadrature."""
    return hankel(quadrature_moments(measure, 2 * n_blocks - 1, W), n_blocks)


def inner_product(measure: MatrixMeasure, P: MatrixPolynomial, Q: MatrixPolynomial,
                  W: MatrixPolynomial | None = None) -> np.ndarray:
    """<P, Q>_W = int P(x) W(x) dmu(x) Q(x)^T by quadrature."""
    degree = (len(P.coeffs) - 1 + len(Q.coeffs) - 1 + measure.factor_degree
              + (0 if W is None else len(W.coeffs) - 1))
    xs, ws = measure.rule(degree)
    total = 0.0
    for x, w in zip(xs, ws):
        mid = measure.density(x)
        if W is not None:
            mid = evaluate(W, x) @ mid
        total = total + w * (evaluate(P, x) @ mid @ evaluate(Q, x).T)
    return total


def basis_gram(measure: MatrixMeasure, basis, n_blocks: int,
               W: MatrixPolynomial | None = None) -> BlockMatrix:
    """
    Gram matrix int b_k(x) W(x) dmu(x) b_l(x) in a monic scalar basis b_0, b_1, ...

    This is T M T^T for the unit lower triangular T holding the basis
    coefficients, so it carries the same factorization data as the moment
    matrix of W dmu while staying well conditioned for unbounded supports.
    """
    from .classical import evaluate_basis

    degW = 0 if W is None else len(W.coeffs) - 1
    xs, ws = measure.rule(2 * (n_blocks - 1) + degW + measure.factor_degree)
    p = measure.p
    G = np.zeros((n_blocks * p, n_blocks * p))
    for x, w in zip(xs, ws):
        mid = measure.density(x)
        if W is not None:
            mid = evaluate(W, x) @ mid
        bx = evaluate_basis(basis[:n_blocks], x)
        G += w * np.kron(np.outer(bx, bx), np.real(mid))
    return BlockMatrix(p, G)
