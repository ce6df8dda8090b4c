"""
Matrix polynomials W(x) = A_0 + A_1 x + ... + A_N x^N and their spectral data.

Coefficients multiply powers of x from the left.  Eigenvalues come from the
block companion matrix; Jordan chains are built from the nested lower
triangular block Toeplitz systems formed by the Taylor coefficients of W at
each eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from .errors import MultiplicityMismatch, NotMonic

ZERO_ATOL = 1e-14
CLUSTER_TOL = 1e-6
RANK_TOL = 1e-10
CHAIN_RTOL = 1e-8


class MatrixPolynomial:
    """Coefficient list A_0..A_N of ``p x p`` blocks."""

    # let ``ndarray @ poly`` fall through to __rmatmul__
    __array_ufunc__ = None

    def __init__(self, coeffs, p: int | None = None):
        coeffs = [np.atleast_2d(np.asarray(c)) for c in coeffs]
        if not coeffs:
            if p is None:
                raise ValueError("empty polynomial needs an explicit block size")
            coeffs = [np.zeros((p, p))]
        dtype = np.result_type(*coeffs, float)
        self.coeffs = [np.array(c, dtype=dtype) for c in coeffs]
        self.p = self.coeffs[0].shape[0]
        for c in self.coeffs:
            if c.shape != (self.p, self.p):
                raise ValueError("all coefficients must be p x p")
            c.setflags(write=False)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def monomial(cls, p: int, n: int) -> "MatrixPolynomial":
        return cls([np.zeros((p, p))] * n + [np.eye(p)])

    @classmethod
    def linear(cls, A) -> "MatrixPolynomial":
        """I x - A."""
        A = np.atleast_2d(np.asarray(A))
        return cls([-A, np.eye(A.shape[0], dtype=A.dtype)])

    @classmethod
    def from_scalar(cls, c, p: int = 1) -> "MatrixPolynomial":
        """Embed a scalar polynomial (ascending coefficients) as c(x) I_p."""
        return cls([ci * np.eye(p) for ci in np.atleast_1d(c)])

    def to_array(self) -> np.ndarray:
        """Coefficients stacked as an ``(N+1, p, p)`` array."""
        return np.stack(self.coeffs)

    # -- basic properties -----------------------------------------------------
    @property
    def degree(self) -> int:
        for j in range(len(self.coeffs) - 1, -1, -1):
            if np.max(np.abs(self.coeffs[j])) > ZERO_ATOL:
                return j
        return 0

    @property
    def is_monic(self) -> bool:
        return np.array_equal(self.coeffs[self.degree], np.eye(self.p))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs[0])

    def coef_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(c) ** 2) for c in self.coeffs)))

    def trim(self) -> "MatrixPolynomial":
        return MatrixPolynomial(self.coeffs[:self.degree + 1])

    def real(self, atol: float = 1e-9) -> "MatrixPolynomial":
        """Drop imaginary parts after checking they are negligible."""
        imag = max(np.max(np.abs(np.imag(c))) for c in self.coeffs)
        scale = max(1.0, self.coef_norm())
        if imag > atol * scale:
            raise ValueError(f"imaginary part {imag:.3e} is not negligible")
        return MatrixPolynomial([np.real(c) for c in self.coeffs])

    # -- algebra --------------------------------------------------------------
    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self._padded(n)
        b = other._padded(n)
        return MatrixPolynomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return self + (-1.0) * other

    def __rmul__(self, c):
        return MatrixPolynomial([c * a for a in self.coeffs])

    def __matmul__(self, other):
        """Polynomial product, or right multiplication by a constant matrix."""
        if isinstance(other, MatrixPolynomial):
            out = [np.zeros((self.p, self.p), dtype=np.result_type(self.coeffs[0], other.coeffs[0]))
                   for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a @ b
            return MatrixPolynomial(out)
        return MatrixPolynomial([a @ other for a in self.coeffs])

    def __rmatmul__(self, other):
        return MatrixPolynomial([other @ a for a in self.coeffs])

    def transpose(self) -> "MatrixPolynomial":
        return MatrixPolynomial([a.T for a in self.coeffs])

    def derivative(self, r: int = 1) -> "MatrixPolynomial":
        if r == 0:
            return self
        n = len(self.coeffs)
        if r >= n:
            return MatrixPolynomial([np.zeros_like(self.coeffs[0])])
        return MatrixPolynomial([
            self.coeffs[j] * (factorial(j) // factorial(j - r)) for j in range(r, n)
        ])

    def taylor(self, x0, order: int | None = None) -> list[np.ndarray]:
        """Taylor coefficients W^{(r)}(x0)/r!, r = 0..order."""
        n = len(self.coeffs)
        order = n - 1 if order is None else order
        out = []
        for r in range(order + 1):
            acc = np.zeros((self.p, self.p), dtype=np.result_type(self.coeffs[0], x0))
            for j in range(r, n):
                acc = acc + self.coeffs[j] * (_binom(j, r) * x0 ** (j - r))
            out.append(acc)
        return out

    def _padded(self, n: int) -> list[np.ndarray]:
        z = np.zeros_like(self.coeffs[0])
        return list(self.coeffs) + [z] * (n - len(self.coeffs))

    def allclose(self, other: "MatrixPolynomial", rtol: float = 1e-9, atol: float = 0.0) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.stack(self._padded(n))
        b = np.stack(other._padded(n))
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"MatrixPolynomial(p={self.p}, degree={self.degree})"


def _binom(n: int, k: int) -> int:
    return factorial(n) // (factorial(k) * factorial(n - k))


def evaluate(W: MatrixPolynomial, x) -> np.ndarray:
    """Horner evaluation of sum_j A_j x^j at a (possibly complex) scalar."""
    acc = np.array(W.coeffs[-1], dtype=np.result_type(W.coeffs[0], x))
    for c in reversed(W.coeffs[:-1]):
        acc = acc * x + c
    return acc


def evaluate_at_matrix(P: MatrixPolynomial, A) -> np.ndarray:
    """P(A) = sum_k P_k A^k, powers of A acting on the right."""
    A = np.asarray(A)
    acc = np.array(P.coeffs[-1], dtype=np.result_type(P.coeffs[0], A))
    for c in reversed(P.coeffs[:-1]):
        acc = acc @ A + c
    return acc


def companion_matrix(W: MatrixPolynomial) -> np.ndarray:
    """Block companion matrix with identity superdiagonal and last row -A_0..-A_{N-1}."""
    W = W.trim()
    if not W.is_monic:
        raise NotMonic("companion matrix needs a monic matrix polynomial")
    p, N = W.p, W.degree
    C = np.zeros((N * p, N * p), dtype=W.coeffs[0].dtype)
    for k in range(N - 1):
        C[k * p:(k + 1) * p, (k + 1) * p:(k + 2) * p] = np.eye(p)
    for j in range(N):
        C[(N - 1) * p:, j * p:(j + 1) * p] = -W.coeffs[j]
    return C


@dataclass
class Eigenvalue:
    value: complex
    algebraic: int
    geometric: int | None = None
    partial: list[int] = field(default_factory=list)
    chains: list[list[np.ndarray]] = field(default_factory=list)

    def root_polynomial(self, j: int) -> list[np.ndarray]:
        """Coefficients of v_j(x) = sum_r v_{j,r} (x - x_i)^r."""
        return self.chains[j]


@dataclass
class SpectralData:
    p: int
    eigenvalues: list[Eigenvalue]

    @property
    def total_multiplicity(self) -> int:
        return sum(e.algebraic for e in self.eigenvalues)

    def iter_chains(self):
        """Yield (eigenvalue, chain) in the canonical order used to assemble jets."""
        for e in self.eigenvalues:
            for chain in e.chains:
                yield e.value, chain

    def to_dict(self) -> dict:
        def cplx(z):
            z = complex(z)
            return [z.real, z.imag]

        return {
            "p": self.p,
            "eigenvalues": [
                {
                    "eigenvalue": cplx(e.value),
                    "algebraic": e.algebraic,
                    "geometric": e.geometric,
                    "partial": list(e.partial),
                    "chains": [[[cplx(c) for c in v] for v in chain] for chain in e.chains],
                }
                for e in self.eigenvalues
            ],
        }


def _sort_key(z: complex):
    return (round(z.real, 12), round(z.imag, 12))


def spectrum(W: MatrixPolynomial, cluster_tol: float = CLUSTER_TOL) -> SpectralData:
    """
    Eigenvalues of a monic W with algebraic multiplicities.

    Companion eigenvalues closer than ``cluster_tol * (1 + spectral radius)``
    are merged (single linkage); each cluster is reported by its mean.
    """
    ev = np.linalg.eigvals(companion_matrix(W))
    radius = float(np.max(np.abs(ev))) if ev.size else 0.0
    thresh = cluster_tol * (1.0 + radius)
    n = len(ev)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ev[i] - ev[j]) <= thresh:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(complex(ev[i]))
    eigs = []
    for members in groups.values():
        mean = complex(np.mean(members))
        if abs(mean.imag) <= thresh:
            mean = complex(mean.real, 0.0)
        eigs.append(Eigenvalue(mean, len(members)))
    eigs.sort(key=lambda e: _sort_key(e.value))
    return SpectralData(W.p, eigs)


def _toeplitz(taylor: list[np.ndarray], m: int) -> np.ndarray:
    p = taylor[0].shape[0]
    T = np.zeros((m * p, m * p), dtype=taylor[0].dtype)
    for i in range(m):
        for j in range(i + 1):
            r = i - j
            if r < len(taylor):
                T[i * p:(i + 1) * p, j * p:(j + 1) * p] = taylor[r]
    return T


def chain_residual(W: MatrixPolynomial, x0, chain) -> float:
    """max_j || sum_{r<=j} W^{(r)}(x0)/r! v_{j-r} ||."""
    tay = W.taylor(x0, len(chain) - 1)
    res = 0.0
    for j in range(len(chain)):
        acc = sum(tay[r] @ chain[j - r] for r in range(j + 1))
        res = max(res, float(np.linalg.norm(acc)))
    return res


def jordan_chains(W: MatrixPolynomial, spec: SpectralData | None = None,
                  rank_tol: float = RANK_TOL, cluster_tol: float = CLUSTER_TOL) -> SpectralData:
    """
    Complete ``spec`` with geometric/partial multiplicities and a canonical
    set of Jordan chains per eigenvalue.

    Chains are chosen longest first: at length m the kernel of the m-block
    Toeplitz system supplies candidate chains, and those whose eigenvector
    leaves the span of the already chosen eigenvectors are kept.
    """
    W = W.trim()
    if spec is None:
        spec = spectrum(W, cluster_tol)
    p = W.p
    wnorm = max(1.0, W.coef_norm())
    thresh = rank_tol * wnorm
    out = []
    for e in spec.eigenvalues:
        x0 = e.value if e.value.imag else e.value.real
        tay = W.taylor(x0, e.algebraic)
        kernels = [None]
        dims = [0]
        m = 0
        while dims[-1] < e.algebraic and m < e.algebraic:
            m += 1
            _, s, Vh = np.linalg.svd(_toeplitz(tay, m))
            rank = int(np.sum(s > thresh))
            K = Vh[rank:].conj().T
            kernels.append(K)
            dims.append(K.shape[1])
            if dims[-1] == dims[-2]:
                break
        if dims[-1] != e.algebraic:
            raise MultiplicityMismatch(
                f"eigenvalue {e.value}: chain lengths sum to {dims[-1]}, algebraic multiplicity {e.algebraic}"
            )
        mmax = len(dims) - 1
        # number of chains of length >= m
        count_ge = [dims[m] - dims[m - 1] for m in range(1, mmax + 1)] + [0]
        chosen_vecs = np.zeros((p, 0), dtype=tay[0].dtype)
        chains, partial = [], []
        for m in range(mmax, 0, -1):
            need = count_ge[m - 1] - count_ge[m] if m - 1 < len(count_ge) else 0
            if need <= 0:
                continue
            K = kernels[m]
            F = K[:p]
            if chosen_vecs.shape[1]:
                Q, _ = np.linalg.qr(chosen_vecs)
                F = F - Q @ (Q.conj().T @ F)
            _, _, Vh = np.linalg.svd(F)
            C = Vh[:need].conj().T
            for c in C.T:
                full = K @ c
                v0 = full[:p]
                scale = np.linalg.norm(v0)
                full = full / scale
                # fix the phase so the largest eigenvector entry is real positive
                piv = np.argmax(np.abs(full[:p]))
                full = full * (abs(full[piv]) / full[piv])
                chain = [full[r * p:(r + 1) * p] for r in range(m)]
                chains.append(chain)
                partial.append(m)
                chosen_vecs = np.column_stack([chosen_vecs, chain[0]])
        if sum(partial) != e.algebraic:
            raise MultiplicityMismatch(
                f"eigenvalue {e.value}: partial multiplicities {partial} do not sum to {e.algebraic}"
            )
        for ch in chains:
            res = chain_residual(W, x0, ch)
            if res > CHAIN_RTOL * wnorm * max(1.0, max(np.linalg.norm(v) for v in ch)):
                raise MultiplicityMismatch(f"chain residual {res:.3e} at eigenvalue {e.value}")
        out.append(Eigenvalue(x0 if isinstance(x0, complex) else complex(x0), e.algebraic,
                              dims[1], partial, chains))
    return SpectralData(p, out)

