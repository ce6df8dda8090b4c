"""
Monic matrix bi-orthogonal polynomial systems and Christoffel-Darboux kernels.

With M = S1^{-1} H S2^{-T}, the coefficient rows of S1 and S2 give

    P1_n(x) = sum_j (S1)_{n,j} x^j,    P2_n(x) = sum_j (S2)_{n,j} x^j,

which satisfy  <P1_n, P2_m> = int P1_n dmu P2_m^T = delta_{nm} H_n.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .blockmat import DEFAULT_TOL, BlockMatrix, GaussBorelFactorization, gauss_borel_factorize
from .matpoly import MatrixPolynomial, evaluate, evaluate_at_matrix


@dataclass(frozen=True)
class BiorthogonalSystem:
    """
    P1_0..P1_{n_max}, P2_0..P2_{n_max} and norms H_0..H_{n_max}.

    ``fact`` and ``M`` keep the factorization and moment truncation the system
    was read from.  Systems built from a Gram matrix in a scalar basis also keep
    that basis and the factorization of the Gram matrix (``basis_fact``), whose
    rows are the coefficients of P1_n, P2_n in the basis.
    """

    P1: list[MatrixPolynomial]
    P2: list[MatrixPolynomial]
    H: list[np.ndarray]
    fact: GaussBorelFactorization
    M: BlockMatrix
    basis: list | None = None
    basis_fact: GaussBorelFactorization | None = None

    @property
    def p(self) -> int:
        return self.M.p

    @property
    def n_max(self) -> int:
        return len(self.P1) - 1

    def H_inv(self, k: int) -> np.ndarray:
        return np.linalg.inv(self.H[k])

    def jacobi_matrix(self) -> np.ndarray:
        """Interior window of S1 Lambda S1^{-1}, (n_max x n_max) blocks."""
        from .blockmat import shift_matrix

        p, n = self.p, self.n_max + 1
        S1 = self.fact.S1.data
        L = S1 @ shift_matrix(p, n) @ self.fact.S1_inv()
        return L[:(n - 1) * p, :(n - 1) * p]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "n_max": self.n_max,
            "P1": [[c.tolist() for c in P.coeffs] for P in self.P1],
            "P2": [[c.tolist() for c in P.coeffs] for P in self.P2],
            "H": [h.tolist() for h in self.H],
        }


def _rows_to_polys(S: BlockMatrix, n_max: int) -> list[MatrixPolynomial]:
    return [MatrixPolynomial([S.block(n, j) for j in range(n + 1)]) for n in range(n_max + 1)]


def system_from_factorization(fact: GaussBorelFactorization, M: BlockMatrix,
                              n_max: int | None = None) -> BiorthogonalSystem:
    n_max = fact.n - 1 if n_max is None else n_max
    return BiorthogonalSystem(
        _rows_to_polys(fact.S1, n_max), _rows_to_polys(fact.S2, n_max),
        list(fact.H[:n_max + 1]), fact, M)


def build_biorthogonal(M: BlockMatrix, n_max: int, tol: float = DEFAULT_TOL) -> BiorthogonalSystem:
    """
    Factorize M_[n_max+1] and read off the monic bi-orthogonal families.

    Raises
    ------
    InsufficientRows
        If M has fewer than ``n_max + 1`` block rows.
    SingularTruncation
        If some leading truncation is singular.
    """
    from .errors import InsufficientRows

    if M.rows < n_max + 1 or M.cols < n_max + 1:
        raise InsufficientRows(f"degree {n_max} needs {n_max + 1} block rows, have {M.rows}")
    Mn = M.leading(n_max + 1)
    return system_from_factorization(gauss_borel_factorize(Mn, tol), Mn)


def build_biorthogonal_in_basis(G: BlockMatrix, basis, n_max: int,
                                tol: float = DEFAULT_TOL) -> BiorthogonalSystem:
    """
    Bi-orthogonal system from a Gram matrix G = T M T^T in a monic scalar basis.

    If G = S1g^{-1} H S2g^{-T} then M = (S1g T)^{-1} H (S2g T)^{-T}, so the
    monomial coefficient rows are those of S1g T and S2g T.
    """
    from .errors import InsufficientRows, NotMonic

    if G.rows < n_max + 1 or len(basis) < n_max + 1:
        raise InsufficientRows(f"degree {n_max} needs {n_max + 1} block rows, have {G.rows}")
    n, p = n_max + 1, G.p
    T = np.zeros((n, n))
    for k, b in enumerate(basis[:n]):
        c = np.asarray(b.coef, dtype=float)
        if len(c) != k + 1 or abs(c[-1] - 1.0) > 1e-8:
            raise NotMonic(f"basis element {k} is not monic of degree {k}")
        T[k, :k + 1] = c / c[-1]
    T = np.kron(T, np.eye(p))
    fg = gauss_borel_factorize(G.leading(n), tol)
    S1 = BlockMatrix(p, fg.S1.data @ T)
    S2 = BlockMatrix(p, fg.S2.data @ T)
    fact = GaussBorelFactorization(S1, S2, fg.H, fg.symmetric)
    system = system_from_factorization(fact, fact.reconstruct())
    return replace(system, basis=list(basis[:n]), basis_fact=fg)


def _from_basis(cs: list[np.ndarray], basis) -> MatrixPolynomial:
    """sum_j cs[j] b_j(x) as a matrix polynomial in x."""
    p = cs[0].shape[0]
    out = [np.zeros((p, p), dtype=np.result_type(*cs)) for _ in range(len(cs))]
    for j, c in enumerate(cs):
        for r, b in enumerate(np.asarray(basis[j].coef, dtype=float)[:j + 1]):
            out[r] = out[r] + b * c
    return MatrixPolynomial(out)


def quasidet_polynomial(M: BlockMatrix, n: int, basis=None) -> tuple[MatrixPolynomial, MatrixPolynomial]:
    """
    P1_n and P2_n from the bordered last quasi-determinants.

    P1_n(x) = Theta*([M_[n] | col(I x^j)] bordered by the row (m_n..m_{2n-1}, I x^n)),
    i.e. coefficient j is -(R M_[n]^{-1})_j with R = (m_n, ..., m_{2n-1}); P2_n
    uses the column (m_n, ..., m_{2n-1})^T and a transpose.  With ``basis`` the
    matrix is a Gram matrix in that scalar basis and x^j is replaced by b_j(x).
    """
    p = M.p
    eye = np.eye(p)
    if n == 0:
        return MatrixPolynomial([eye]), MatrixPolynomial([eye])
    from .errors import SingularLeadingBlock

    A = M.data[:n * p, :n * p]
    R = M.data[n * p:(n + 1) * p, :n * p]
    C = M.data[:n * p, n * p:(n + 1) * p]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= np.finfo(float).eps * sv[0] * A.shape[0]:
        raise SingularLeadingBlock(f"M_[{n}] is numerically singular")
    row = -np.linalg.solve(A.T, R.T).T
    col = -np.linalg.solve(A, C)
    c1 = [row[:, j * p:(j + 1) * p] for j in range(n)] + [eye]
    c2 = [col[j * p:(j + 1) * p].T for j in range(n)] + [eye]
    if basis is not None:
        return _from_basis(c1, basis), _from_basis(c2, basis)
    return MatrixPolynomial(c1), MatrixPolynomial(c2)


def cd_kernel(system: BiorthogonalSystem, n: int, x, y) -> np.ndarray:
    """K_n(x, y) = sum_{k<=n} P2_k(y)^T H_k^{-1} P1_k(x)."""
    acc = 0
    for k in range(n + 1):
        acc = acc + evaluate(system.P2[k], y).T @ np.linalg.solve(system.H[k], evaluate(system.P1[k], x))
    return acc


def cd_kernel_at_matrix(system: BiorthogonalSystem, n: int, y, A) -> np.ndarray:
    """K_n(A, y) = sum_{m<=n} P2_m(y)^T H_m^{-1} P1_m(A), P1_m(A) with right powers of A."""
    acc = 0
    for m in range(n + 1):
        acc = acc + evaluate(system.P2[m], y).T @ np.linalg.solve(system.H[m], evaluate_at_matrix(system.P1[m], A))
    return acc


def _power_row(p: int, n: int, z, basis=None) -> np.ndarray:
    if basis is None:
        vals = [z ** j for j in range(n + 1)]
    else:
        from .classical import evaluate_basis

        vals = evaluate_basis(basis[:n + 1], z)
    return np.hstack([np.eye(p) * v for v in vals])


def abc_kernel(M: BlockMatrix, n: int, x, y, basis=None) -> np.ndarray:
    """
    [I, I y, ..., I y^n] M_[n+1]^{-1} [I, I x, ..., I x^n]^T, an independent route to K_n(x, y).

    With ``basis`` M is a Gram matrix in that scalar basis and the powers are
    replaced by b_j(x), b_j(y).
    """
    p = M.p
    Mn = M.data[:(n + 1) * p, :(n + 1) * p]
    return _power_row(p, n, y, basis) @ np.linalg.solve(Mn, _power_row(p, n, x, basis).T)


def cd_formula_residual(system: BiorthogonalSystem, n: int, x, y) -> float:
    """Norm of (x-y)K_n(x,y) - [P2_n(y)^T H_n^{-1} P1_{n+1}(x) - P2_{n+1}(y)^T H_n^{-1} P1_n(x)]."""
    lhs = (x - y) * cd_kernel(system, n, x, y)
    Hi = system.H_inv(n)
    rhs = (evaluate(system.P2[n], y).T @ Hi @ evaluate(system.P1[n + 1], x)
           - evaluate(system.P2[n + 1], y).T @ Hi @ evaluate(system.P1[n], x))
    return float(np.max(np.abs(lhs - rhs)))
