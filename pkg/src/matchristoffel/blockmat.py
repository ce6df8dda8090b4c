"""
Truncated semi-infinite block matrices and their unpivoted block LU.

A :class:`BlockMatrix` stores a dense ``(rows*p) x (cols*p)`` array and
addresses it in ``p x p`` blocks.  The moment matrix and every factor of the
Gauss-Borel factorization

    M = S1^{-1} H S2^{-T}

live here, with S1, S2 lower unitriangular and H block diagonal.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InsufficientRows, SingularLeadingBlock, SingularTruncation

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class BlockMatrix:
    """Dense storage of a ``rows x cols`` array of ``p x p`` blocks."""

    p: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] % self.p or data.shape[1] % self.p:
            raise ValueError(f"shape {data.shape} is not a multiple of block size {self.p}")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0] // self.p

    @property
    def cols(self) -> int:
        return self.data.shape[1] // self.p

    def block(self, k: int, l: int) -> np.ndarray:
        p = self.p
        return self.data[k * p:(k + 1) * p, l * p:(l + 1) * p]

    def leading(self, n: int) -> "BlockMatrix":
        """Leading principal ``n x n`` block truncation M_[n]."""
        p = self.p
        return BlockMatrix(p, self.data[:n * p, :n * p])

    def window(self, rows: int, cols: int) -> "BlockMatrix":
        p = self.p
        return BlockMatrix(p, self.data[:rows * p, :cols * p])

    def transpose(self) -> "BlockMatrix":
        return BlockMatrix(self.p, self.data.T)

    @classmethod
    def from_blocks(cls, blocks) -> "BlockMatrix":
        arr = np.block([[np.asarray(b) for b in row] for row in blocks])
        return cls(np.asarray(blocks[0][0]).shape[0], arr)

    @classmethod
    def identity(cls, p: int, n: int) -> "BlockMatrix":
        return cls(p, np.eye(n * p))

    @classmethod
    def block_diag(cls, blocks) -> "BlockMatrix":
        blocks = [np.asarray(b) for b in blocks]
        p = blocks[0].shape[0]
        n = len(blocks)
        out = np.zeros((n * p, n * p), dtype=np.result_type(*blocks))
        for k, b in enumerate(blocks):
            out[k * p:(k + 1) * p, k * p:(k + 1) * p] = b
        return cls(p, out)

    def diagonal_blocks(self) -> list[np.ndarray]:
        return [self.block(k, k) for k in range(min(self.rows, self.cols))]

    def is_block_hankel(self, atol: float = 0.0) -> bool:
        """Block (k,l) depends only on k+l."""
        for k in range(self.rows - 1):
            for l in range(1, self.cols):
                if np.max(np.abs(self.block(k, l) - self.block(k + 1, l - 1))) > atol:
                    return False
        return True

    def to_csv(self) -> str:
        """Row-major dump with a ``p,rows,cols`` header line."""
        buf = io.StringIO()
        buf.write(f"{self.p},{self.rows},{self.cols}\n")
        for row in self.data:
            buf.write(",".join(f"{v:.17g}" for v in np.real_if_close(row)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BlockMatrix":
        lines = text.strip().splitlines()
        p, rows, cols = (int(v) for v in lines[0].split(","))
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        if data.shape != (rows * p, cols * p):
            raise ValueError("CSV body does not match its header")
        return cls(p, data)


@dataclass(frozen=True)
class GaussBorelFactorization:
    """M = S1^{-1} H S2^{-T} with S1, S2 lower unitriangular and H block diagonal."""

    S1: BlockMatrix
    S2: BlockMatrix
    H: list[np.ndarray]
    symmetric: bool = False

    @property
    def p(self) -> int:
        return self.S1.p

    @property
    def n(self) -> int:
        return self.S1.rows

    def H_matrix(self) -> BlockMatrix:
        return BlockMatrix.block_diag(self.H)

    def S1_inv(self) -> np.ndarray:
        return _unit_lower_inverse(self.S1.data)

    def S2_inv(self) -> np.ndarray:
        return _unit_lower_inverse(self.S2.data)

    def reconstruct(self) -> BlockMatrix:
        L = self.S1_inv()
        U = self.S2_inv().T
        return BlockMatrix(self.p, L @ self.H_matrix().data @ U)

    def S2_tilde(self) -> np.ndarray:
        """H S2^{-T}, the upper triangular companion factor used by the Toda flows."""
        return self.H_matrix().data @ self.S2_inv().T


def _unit_lower_inverse(S: np.ndarray) -> np.ndarray:
    eye = np.eye(S.shape[0], dtype=S.dtype)
    return solve_triangular(S, eye, lower=True, unit_diagonal=True)


def _check_pivot(D: np.ndarray, k: int, tol: float, scale: float) -> None:
    if not np.all(np.isfinite(D)):
        raise SingularTruncation(k)
    sv = np.linalg.svd(D, compute_uv=False)
    smax, smin = sv[0], sv[-1]
    # Exact (or roundoff-level) zero pivots are singular whatever their shape.
    if smax <= 1e3 * np.finfo(float).eps * scale:
        raise SingularTruncation(k, 0.0)
    if smin < tol * smax:
        raise SingularTruncation(k, smin / smax)


def gauss_borel_factorize(M: BlockMatrix, tol: float = DEFAULT_TOL) -> GaussBorelFactorization:
    """
    Unpivoted block LU of a square block matrix.

    Parameters
    ----------
    M : BlockMatrix
        Square truncation with ``n`` block rows.
    tol : float
        A pivot block is declared singular when its smallest singular value
        falls below ``tol`` times its largest.

    Returns
    -------
    GaussBorelFactorization

    Raises
    ------
    SingularTruncation
        With ``k`` the size of the first singular leading truncation M_[k].
    """
    if M.rows != M.cols:
        raise ValueError("gauss_borel_factorize needs a square block matrix")
    p, n = M.p, M.rows
    A = np.array(M.data, dtype=np.result_type(M.data, float))
    symmetric = bool(np.array_equal(A, A.T))
    absA = np.abs(A)

    L = np.eye(n * p, dtype=A.dtype)
    U = np.eye(n * p, dtype=A.dtype)
    H = []
    for k in range(n):
        sk = slice(k * p, (k + 1) * p)
        rest = slice((k + 1) * p, None)
        D = A[sk, sk].copy()
        # roundoff in the Schur complement scales with the leading truncation
        scale = max(np.max(absA[:(k + 1) * p, :(k + 1) * p]), np.finfo(float).tiny)
        _check_pivot(D, k + 1, tol, scale)
        if symmetric:
            D = (D + D.T) / 2
        H.append(D)
        if k == n - 1:
            break
        # L_{ik} = A_{ik} D^{-1},  U_{kj} = D^{-1} A_{kj}
        Lcol = np.linalg.solve(D.T, A[rest, sk].T).T
        Urow = np.linalg.solve(D, A[sk, rest])
        L[rest, sk] = Lcol
        U[sk, rest] = Urow
        A[rest, rest] -= Lcol @ D @ Urow

    S1 = _unit_lower_inverse(L)
    S2 = S1.copy() if symmetric else _unit_lower_inverse(U.T)
    return GaussBorelFactorization(BlockMatrix(p, S1), BlockMatrix(p, S2), H, symmetric)


def last_quasideterminant(M, p: int | None = None) -> np.ndarray:
    """Schur complement D - C A^{-1} B of the trailing ``p x p`` block."""
    if isinstance(M, BlockMatrix):
        p = M.p
        M = M.data
    M = np.asarray(M)
    if p is None:
        raise ValueError("block size p is required for a raw array")
    if M.shape[0] == p:
        return M.copy()
    A, B = M[:-p, :-p], M[:-p, -p:]
    C, D = M[-p:, :-p], M[-p:, -p:]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= np.finfo(float).eps * sv[0] * A.shape[0]:
        raise SingularLeadingBlock("leading principal part is numerically singular")
    return D - C @ np.linalg.solve(A, B)


def bordered_truncation(M: BlockMatrix, size: int, row: int, which: int = 1) -> np.ndarray:
    """
    M_[size] with its last block row (``which=1``) or last block column
    (``which=2``) replaced by block row/column ``row`` of M.
    """
    p = M.p
    idx = list(range(size - 1)) + [row]
    full = list(range(size))
    rows_i = np.concatenate([np.arange(i * p, (i + 1) * p) for i in (idx if which == 1 else full)])
    cols_i = np.concatenate([np.arange(i * p, (i + 1) * p) for i in (full if which == 1 else idx)])
    return M.data[np.ix_(rows_i, cols_i)]


def apply_poly_shift(W, M: BlockMatrix, n: int | None = None) -> BlockMatrix:
    """
    Left multiplication by W(Lambda): block (k,l) = sum_j A_j M_{k+j,l}.

    ``W`` is a MatrixPolynomial (or a list of coefficient blocks).  The output
    has ``n`` block rows, by default ``M.rows - deg W``; the trailing rows are
    never padded.
    """
    coeffs = [np.asarray(c) for c in getattr(W, "coeffs", W)]
    N = len(coeffs) - 1
    p = M.p
    if n is None:
        n = M.rows - N
    if n <= 0 or M.rows < n + N:
        raise InsufficientRows(f"need {n + N} block rows for degree {N} shift of {n} rows, have {M.rows}")
    dtype = np.result_type(M.data, *coeffs)
    out = np.zeros((n * p, M.cols * p), dtype=dtype)
    for k in range(n):
        acc = out[k * p:(k + 1) * p]
        for j, A in enumerate(coeffs):
            acc += A @ M.data[(k + j) * p:(k + j + 1) * p]
    return BlockMatrix(p, out)


def shift_matrix(p: int, rows: int, cols: int | None = None) -> np.ndarray:
    """Dense window of Lambda (identity blocks on the first block superdiagonal)."""
    cols = rows if cols is None else cols
    L = np.zeros((rows * p, cols * p))
    for k in range(min(rows, cols - 1)):
        L[k * p:(k + 1) * p, (k + 1) * p:(k + 2) * p] = np.eye(p)
    return L
