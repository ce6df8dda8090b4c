"""
Christoffel transformations dmu -> W(x) dmu of bi-orthogonal systems.

The perturbed families are obtained from the original ones through the
spectral jets of P1_k along the Jordan chains of W:

    P1hat_k(x) W(x) = P1_{k+N}(x) - pi_{k+N} Pi_{k,N}^{-1} (P1_k(x), ..., P1_{k+N-1}(x))^T,
    Hhat_k          = omega_{k,k} H_k,
    P2hat_k(y)^T Hhat_k^{-1} = -gamma_k(y) Pi_{k+1,N}^{-1} (0, ..., 0, I)^T,

with gamma_k(y) = sum_{m<=k} P2_m(y)^T H_m^{-1} pi_m.  A separate path handles
the unimodular perturbation W = calW calW^T whose determinant is constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .biorth import BiorthogonalSystem
from .blockmat import BlockMatrix
from .errors import DegreeWindow, DivisionResidual, InsufficientRows, SingularPA, SingularPi
from .matpoly import MatrixPolynomial, SpectralData, evaluate, evaluate_at_matrix

PI_TOL = 1e-12
DIVISION_TOL = 1e-8
IMAG_TOL = 1e-9


# -- spectral jets --------------------------------------------------------------

def jet_columns(P: MatrixPolynomial, x0, chain) -> np.ndarray:
    """
    Columns d^r/dx^r (P(x) v(x)) at x0, r = 0..len(chain)-1, for the root
    polynomial v(x) = sum_r chain[r] (x - x0)^r.
    """
    kappa = len(chain)
    tay = P.taylor(x0, kappa - 1)
    cols = []
    for r in range(kappa):
        acc = sum(tay[s] @ chain[r - s] for s in range(r + 1))
        cols.append(factorial(r) * acc)
    return np.column_stack(cols)


@dataclass(frozen=True)
class SpectralJet:
    """
    Rows pi_k (p x Np) of jets of P1_k along every Jordan chain of W.

    Column order: eigenvalues as sorted in ``spec``, chains as produced, and
    derivative order ascending within a chain.
    """

    spec: SpectralData
    N: int
    pi: dict

    @property
    def width(self) -> int:
        return self.spec.total_multiplicity

    def row(self, k: int) -> np.ndarray:
        return self.pi[k]

    def Pi(self, k: int) -> np.ndarray:
        """Pi_{k,N}: the rows pi_k, ..., pi_{k+N-1} stacked (Np x Np)."""
        return np.vstack([self.pi[k + j] for j in range(self.N)])

    def gamma(self, system: BiorthogonalSystem, k: int) -> list[np.ndarray]:
        """Coefficients in y of gamma_k(y) = sum_{m<=k} P2_m(y)^T H_m^{-1} pi_m."""
        out = [np.zeros((system.p, self.width), dtype=self.pi[0].dtype) for _ in range(k + 1)]
        for m in range(k + 1):
            G = np.linalg.solve(system.H[m], self.pi[m])
            for j, c in enumerate(system.P2[m].coeffs):
                out[j] = out[j] + c.T @ G
        return out


def spectral_jets(system: BiorthogonalSystem, spec: SpectralData, ks) -> SpectralJet:
    """Assemble pi_k for every k in ``ks`` (each k must be <= system.n_max)."""
    N = spec.total_multiplicity // spec.p
    pi = {}
    for k in ks:
        if k > system.n_max:
            raise InsufficientRows(f"jets of degree {k} need a system up to degree {k}, have {system.n_max}")
        cols = [jet_columns(system.P1[k], x0, chain) for x0, chain in spec.iter_chains()]
        pi[k] = np.hstack(cols)
    return SpectralJet(spec, N, pi)


def _check_pi(Pi: np.ndarray, k: int, tol: float) -> None:
    sv = np.linalg.svd(Pi, compute_uv=False)
    if not np.all(np.isfinite(sv)) or sv[0] == 0 or sv[-1] < tol * sv[0]:
        ratio = sv[-1] / sv[0] if sv[0] else 0.0
        raise SingularPi(k, f"Pi_{{{k},N}} is numerically singular (sigma ratio {ratio:.3e})")


# -- polynomial right division ----------------------------------------------------

def right_divide(R: MatrixPolynomial, W: MatrixPolynomial,
                 tol: float = DIVISION_TOL) -> tuple[MatrixPolynomial, float]:
    """
    Solve Q(x) W(x) = R(x) for Q in the least-squares sense.

    Returns Q and the relative residual; raises DivisionResidual when the
    residual exceeds ``tol`` (R is then not right-divisible by W).
    """
    p = R.p
    A = W.trim().coeffs
    N = len(A) - 1
    degR = len(R.coeffs) - 1
    d = degR - N
    if d < 0:
        raise DivisionResidual("dividend degree is below the divisor degree")
    dtype = np.result_type(R.coeffs[0], A[0])
    B = np.zeros(((d + 1) * p, (degR + 1) * p), dtype=dtype)
    for i in range(d + 1):
        for j, Aj in enumerate(A):
            B[i * p:(i + 1) * p, (i + j) * p:(i + j + 1) * p] = Aj
    Rrow = np.hstack(R.coeffs)
    Qrow = np.linalg.lstsq(B.T, Rrow.T, rcond=None)[0].T
    res = float(np.linalg.norm(Qrow @ B - Rrow) / max(1.0, np.linalg.norm(Rrow)))
    if res > tol:
        raise DivisionResidual(f"division by W leaves relative residual {res:.3e}")
    return MatrixPolynomial([Qrow[:, i * p:(i + 1) * p] for i in range(d + 1)]), res


def _finish(P: MatrixPolynomial, real: bool) -> MatrixPolynomial:
    """Snap the leading coefficient to I and drop negligible imaginary parts."""
    coeffs = list(P.coeffs)
    lead = coeffs[-1]
    eye = np.eye(P.p)
    if np.max(np.abs(lead - eye)) > 1e-6 * max(1.0, P.coef_norm()):
        raise DivisionResidual("quotient is not monic")
    coeffs[-1] = eye.astype(lead.dtype)
    out = MatrixPolynomial(coeffs)
    return out.real(IMAG_TOL) if real and not out.is_real else out


def _real_array(a: np.ndarray, real: bool) -> np.ndarray:
    if not real or not np.iscomplexobj(a):
        return a
    if np.max(np.abs(a.imag)) > IMAG_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError("imaginary part is not negligible")
    return a.real.copy()


# -- the general transformation -----------------------------------------------------

@dataclass(frozen=True)
class TransformResult:
    """Perturbed degree-k data: P1hat_k, Hhat_k, P2hat_k and the connection row."""

    k: int
    P1: MatrixPolynomial
    H: np.ndarray
    P2: MatrixPolynomial
    omega_row: list[np.ndarray]
    division_residual: float

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "P1": [c.tolist() for c in self.P1.coeffs],
            "P2": [c.tolist() for c in self.P2.coeffs],
            "H": np.asarray(self.H).tolist(),
            "omega_row": [np.asarray(w).tolist() for w in self.omega_row],
            "division_residual": self.division_residual,
        }


def omega_row_from_jets(jets: SpectralJet, k: int) -> list[np.ndarray]:
    """omega_{k,k}, ..., omega_{k,k+N-1} from -pi_{k+N} Pi_{k,N}^{-1}."""
    p = jets.spec.p
    Pi = jets.Pi(k)
    row = -np.linalg.solve(Pi.T, jets.row(k + jets.N).T).T
    return [row[:, j * p:(j + 1) * p] for j in range(jets.N)]


def christoffel_transform(system: BiorthogonalSystem, W: MatrixPolynomial, spec: SpectralData,
                          k: int, pi_tol: float = PI_TOL, with_p2: bool = True) -> TransformResult:
    """
    Perturbed polynomials of degree k for dmu -> W dmu from the spectral jets.

    Parameters
    ----------
    system : BiorthogonalSystem
        Original system; needs degrees up to k + N.
    W : MatrixPolynomial
        Monic perturbation of degree N.
    spec : SpectralData
        Output of :func:`jordan_chains` for W.
    k : int
        Degree of the perturbed polynomials.
    with_p2 : bool
        Skip the second family (and its Pi_{k+1,N} requirement) when False.

    Raises
    ------
    SingularPi
        If Pi_{k,N} (or Pi_{k+1,N}) is numerically singular.
    DivisionResidual
        If the jet combination is not right-divisible by W.
    """
    W = W.trim()
    N = W.degree
    p = system.p
    if system.n_max < k + N:
        raise InsufficientRows(f"degree {k} transform needs the system up to degree {k + N}")
    jets = spectral_jets(system, spec, range(0, k + N + 1))
    _check_pi(jets.Pi(k), k, pi_tol)
    omega = omega_row_from_jets(jets, k)
    R = system.P1[k + N]
    for j, w in enumerate(omega):
        R = R + w @ system.P1[k + j]
    real = system.P1[0].is_real and W.is_real
    P1hat, res = right_divide(R, W)
    P1hat = _finish(P1hat, real)
    Hhat = omega[0] @ system.H[k]
    if with_p2:
        _check_pi(jets.Pi(k + 1), k + 1, pi_tol)
        E = np.zeros((N * p, p))
        E[-p:] = np.eye(p)
        X = np.linalg.solve(jets.Pi(k + 1), E) @ Hhat
        P2hat = _finish(MatrixPolynomial([-(g @ X).T for g in jets.gamma(system, k)]), real)
    else:
        P2hat = MatrixPolynomial([np.full((p, p), np.nan)])
    Hhat = _real_array(Hhat, real)
    omega = [_real_array(w, real) for w in omega]
    return TransformResult(k, P1hat, Hhat, P2hat, omega, res)


def degree_one_transform(system: BiorthogonalSystem, A, k: int, tol: float = PI_TOL) -> TransformResult:
    """
    Perturbation by W(x) = I x - A without spectral data:

        P1hat_k(x) (I x - A) = P1_{k+1}(x) - P1_{k+1}(A) P1_k(A)^{-1} P1_k(x),
        Hhat_k = -P1_{k+1}(A) P1_k(A)^{-1} H_k,
        P2hat_k(y)^T = K_k(A, y) P1_k(A)^{-1} H_k,

    where K_k(A, y) = sum_{m<=k} P2_m(y)^T H_m^{-1} P1_m(A).
    """
    A = np.asarray(A)
    if system.n_max < k + 1:
        raise InsufficientRows(f"degree {k} transform needs the system up to degree {k + 1}")
    PAk = evaluate_at_matrix(system.P1[k], A)
    sv = np.linalg.svd(PAk, compute_uv=False)
    if sv[0] == 0 or sv[-1] < tol * sv[0]:
        ratio = sv[-1] / sv[0] if sv[0] else 0.0
        raise SingularPA(f"P1_{k}(A) is numerically singular (sigma ratio {ratio:.3e})")
    T = np.linalg.solve(PAk.T, evaluate_at_matrix(system.P1[k + 1], A).T).T
    R = system.P1[k + 1] - T @ system.P1[k]
    W = MatrixPolynomial.linear(A)
    real = system.P1[0].is_real and not np.iscomplexobj(A)
    P1hat, res = right_divide(R, W)
    P1hat = _finish(P1hat, real)
    Hhat = -T @ system.H[k]
    right = np.linalg.solve(PAk, system.H[k])
    coeffs = [np.zeros((system.p, system.p), dtype=np.result_type(A, float)) for _ in range(k + 1)]
    for m in range(k + 1):
        G = np.linalg.solve(system.H[m], evaluate_at_matrix(system.P1[m], A)) @ right
        for j, c in enumerate(system.P2[m].coeffs):
            coeffs[j] = coeffs[j] + c.T @ G
    P2hat = _finish(MatrixPolynomial([c.T for c in coeffs]), real)
    return TransformResult(k, P1hat, _real_array(Hhat, real), P2hat, [-T], res)


# -- connection matrices -------------------------------------------------------------

@dataclass(frozen=True)
class ConnectionData:
    """
    omega1 = Shat1 W(Lambda) S1^{-1} (n x (n+N) blocks), omega2 = (S2 Shat2^{-1})^T
    (n x n blocks) and the norms on both sides.
    """

    N: int
    omega1: BlockMatrix
    omega2: BlockMatrix
    H: list[np.ndarray]
    H_hat: list[np.ndarray]
    W: MatrixPolynomial

    @property
    def n(self) -> int:
        return self.omega1.rows

    def band_defect(self) -> float:
        """Largest entry outside the band plus the deviation of the N-th superdiagonal from I."""
        p, N = self.omega1.p, self.N
        worst = 0.0
        for k in range(self.n):
            for l in range(self.omega1.cols):
                b = self.omega1.block(k, l)
                if l == k + N:
                    worst = max(worst, float(np.max(np.abs(b - np.eye(p)))))
                elif l < k or l > k + N:
                    worst = max(worst, float(np.max(np.abs(b))))
        return worst

    def diagonal_defect(self) -> float:
        """max_k ||omega1_{k,k} H_k - Hhat_k|| / ||Hhat_k||."""
        return max(
            float(np.max(np.abs(self.omega1.block(k, k) @ self.H[k] - self.H_hat[k]))
                  / np.max(np.abs(self.H_hat[k])))
            for k in range(self.n))

    def relation_defect(self) -> float:
        """Relative size of Hhat omega2 - omega1 H on the n x n window."""
        p, n = self.omega1.p, self.n
        lhs = BlockMatrix.block_diag(self.H_hat).data @ self.omega2.data
        rhs = self.omega1.data @ BlockMatrix.block_diag(self.H).data
        rhs = rhs[:, :n * p]
        return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300))

    def residuals(self) -> dict:
        return {
            "band": self.band_defect(),
            "diagonal": self.diagonal_defect(),
            "relation": self.relation_defect(),
        }

    def to_dict(self) -> dict:
        p = self.omega1.p
        rows = [[self.omega1.block(k, k + j).tolist() for j in range(self.N + 1)] for k in range(self.n)]
        return {
            "N": self.N,
            "p": p,
            "omega1_band": rows,
            "omega2": self.omega2.data.tolist(),
            "H_hat": [h.tolist() for h in self.H_hat],
            "residuals": self.residuals(),
        }


def poly_shift_window(W: MatrixPolynomial, rows: int, cols: int) -> np.ndarray:
    """Dense window of W(Lambda) = sum_j A_j Lambda^j."""
    p = W.p
    out = np.zeros((rows * p, cols * p), dtype=W.coeffs[0].dtype)
    for k in range(rows):
        for j, Aj in enumerate(W.coeffs):
            if k + j < cols:
                out[k * p:(k + 1) * p, (k + j) * p:(k + j + 1) * p] = Aj
    return out


def connection_matrices(system: BiorthogonalSystem, perturbed: BiorthogonalSystem,
                        W: MatrixPolynomial) -> ConnectionData:
    """
    Resolvents linking the two systems on the window of the perturbed one.

    Lower triangular factors make every truncation below exact, so omega1
    only needs the original system on n + N blocks.
    """
    W = W.trim()
    N, p = W.degree, system.p
    n = perturbed.n_max + 1
    if system.n_max + 1 < n + N:
        raise DegreeWindow(f"omega1 on {n} rows needs the original system on {n + N} blocks, have {system.n_max + 1}")
    S1inv = system.fact.S1_inv()[:(n + N) * p, :(n + N) * p]
    Shat1 = perturbed.fact.S1.data[:n * p, :n * p]
    omega1 = Shat1 @ poly_shift_window(W, n, n + N) @ S1inv
    S2 = system.fact.S2.data[:n * p, :n * p]
    Shat2inv = perturbed.fact.S2_inv()[:n * p, :n * p]
    omega2 = (S2 @ Shat2inv).T
    return ConnectionData(N, BlockMatrix(p, omega1), BlockMatrix(p, omega2),
                          list(system.H[:n + N]), list(perturbed.H[:n]), W)


def connection_identity_residual(system: BiorthogonalSystem, perturbed: BiorthogonalSystem,
                                 conn: ConnectionData, x) -> float:
    """max_k || sum_l omega1_{k,l} P1_l(x) - P1hat_k(x) W(x) ||, relative to the row scale."""
    Wx = evaluate(conn.W, x)
    worst = 0.0
    for k in range(conn.n):
        lhs = sum(conn.omega1.block(k, l) @ evaluate(system.P1[l], x) for l in range(k, k + conn.N + 1))
        rhs = evaluate(perturbed.P1[k], x) @ Wx
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))))
    return worst


def perturbed_cd_relation_check(system: BiorthogonalSystem, perturbed: BiorthogonalSystem,
                                conn: ConnectionData, n: int, x, y, variant: str = "x") -> float:
    """
    Norm of  K_n(x,y) + sum_j P2hat_j(y)^T Hhat_j^{-1} sum_{m>n} omega1_{j,m} P1_m(x) - Khat_n(x,y) W(.).

    The inner sums run over j = max(0, n-N+1)..n and m = n+1..j+N (perturbed
    polynomials of negative degree vanish).  ``variant`` selects W(x) (the
    identity that holds) or W(y).
    """
    from .biorth import cd_kernel

    N = conn.N
    if n >= conn.n or n + N > system.n_max:
        raise DegreeWindow(f"relation at n={n} needs perturbed degree {n} and original degree {n + N}")
    tail = 0
    for j in range(max(0, n - N + 1), n + 1):
        inner = sum(conn.omega1.block(j, m) @ evaluate(system.P1[m], x) for m in range(n + 1, j + N + 1))
        tail = tail + evaluate(perturbed.P2[j], y).T @ np.linalg.solve(perturbed.H[j], inner)
    Khat = cd_kernel(perturbed, n, x, y)
    z = x if variant == "x" else y
    res = cd_kernel(system, n, x, y) + tail - Khat @ evaluate(conn.W, z)
    return float(np.max(np.abs(res)))


# -- unimodular perturbation with singular leading coefficient ----------------------

def unimodular_factor(A) -> MatrixPolynomial:
    """calW(x) = [[I, A x], [0, I]] for a q x q block A."""
    A = np.asarray(A, dtype=float)
    q = A.shape[0]
    Z, I = np.zeros((q, q)), np.eye(q)
    return MatrixPolynomial([np.block([[I, Z], [Z, I]]), np.block([[Z, A], [Z, Z]])])


def unimodular_weight(A) -> MatrixPolynomial:
    """W(x) = calW(x) calW(x)^T, degree two with singular leading coefficient."""
    F = unimodular_factor(A)
    return F @ F.transpose()


def scalar_recurrence(system: BiorthogonalSystem, k: int) -> tuple[float, float]:
    """
    (J_{k,k-1}, J_{k,k}) of the scalar system: h_k/h_{k-1} and the difference of
    subleading coefficients of p_k and p_{k+1}.
    """
    if system.p != 1:
        raise ValueError("scalar_recurrence needs a p = 1 system")
    h = [float(np.real(H[0, 0])) for H in system.H]
    off = 0.0 if k <= 0 else h[k] / h[k - 1]
    diag = float(system.P1[k].coeffs[k - 1][0, 0] if k else 0.0) - float(system.P1[k + 1].coeffs[k][0, 0])
    return off, diag


@dataclass(frozen=True)
class UnimodularResult:
    """
    P_hat_{k+1}(x) calW(x) = C0 p_k(x) + C1 p_{k+1}(x) + C2 p_{k+2}(x).

    ``P`` is the perturbed monic polynomial R(x) calW(x)^{-1} of degree k+1.
    """

    k: int
    rho: np.ndarray
    C0: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    H12: np.ndarray
    H22: np.ndarray
    P: MatrixPolynomial

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "rho": self.rho.tolist(),
            "coefficients": [self.C0.tolist(), self.C1.tolist(), self.C2.tolist()],
            "H12": self.H12.tolist(),
            "H22": self.H22.tolist(),
            "P": [c.tolist() for c in self.P.coeffs],
        }


def singular_unimodular_transform(scalar_system: BiorthogonalSystem, A, k: int) -> UnimodularResult:
    """
    Degree k+1 polynomial of W(x) dmu with W = calW calW^T, calW = [[I, A x], [0, I]].

    With J = J_{k+1,k}, J' = J_{k+1,k+1} and rho = (I + J A^T A)^{-1}:

        C0 = -[[J J' A rho A^T, 0], [J rho A^T, 0]],
        C1 = [[I, J' A rho], [0, rho]],
        C2 = [[0, A], [0, 0]],

    and (Hhat_{k+1})_{12} = J' h_{k+1} A rho, (Hhat_{k+1})_{22} = h_{k+1} rho.
    ``k = -1`` is allowed (p_{-1} = 0).
    """
    A = np.asarray(A, dtype=float)
    q = A.shape[0]
    if k < -1 or scalar_system.n_max < k + 2:
        raise DegreeWindow(f"k={k} needs the scalar system up to degree {k + 2}")
    J, Jd = scalar_recurrence(scalar_system, k + 1)
    h1 = float(np.real(scalar_system.H[k + 1][0, 0]))
    I, Z = np.eye(q), np.zeros((q, q))
    rho = np.linalg.inv(I + J * A.T @ A)
    C0 = -np.block([[J * Jd * A @ rho @ A.T, Z], [J * rho @ A.T, Z]])
    C1 = np.block([[I, Jd * A @ rho], [Z, rho]])
    C2 = np.block([[Z, A], [Z, Z]])

    def lift(j):
        if j < 0:
            return MatrixPolynomial([np.zeros((2 * q, 2 * q))])
        return MatrixPolynomial([c[0, 0] * np.eye(2 * q) for c in scalar_system.P1[j].coeffs])

    R = C0 @ lift(k) + C1 @ lift(k + 1) + C2 @ lift(k + 2)
    inv_factor = unimodular_factor(-A)
    P = MatrixPolynomial((R @ inv_factor).coeffs[:k + 2])
    return UnimodularResult(k, rho, C0, C1, C2, Jd * h1 * A @ rho, h1 * rho, P)


def basis_jacobi(basis, rows: int, cols: int) -> np.ndarray:
    """Matrix of multiplication by x in a monic scalar basis, truncated to rows x cols."""
    from .classical import basis_recurrence

    beta, gamma = basis_recurrence(basis[:rows + 1])
    J = np.zeros((rows, cols))
    for k in range(rows):
        J[k, k + 1] = 1.0
        J[k, k] = beta[k]
        if k > 0:
            J[k, k - 1] = gamma[k]
    return J


def _same_basis(a, b) -> bool:
    if a is None or b is None or len(a) < 1:
        return False
    return all(len(x.coef) == len(y.coef) and np.allclose(x.coef, y.coef, rtol=1e-14, atol=0.0)
               for x, y in zip(a, b))


def unimodular_resolvent(scalar_system: BiorthogonalSystem, perturbed: BiorthogonalSystem, A) -> BlockMatrix:
    """
    omega = Shat calW(Lambda) S^{-1} on n x (n+1) blocks, S the scalar factor times I_{2q}.

    When both systems were factorized in the same scalar basis the product is
    formed in basis coordinates, where calW(Lambda) becomes I + N (x) J_b with J_b
    the recurrence matrix of the basis; monomial coordinates lose digits for
    unbounded supports.
    """
    F = unimodular_factor(A)
    p = F.p
    n = perturbed.n_max + 1
    if scalar_system.n_max + 1 < n + 1:
        raise DegreeWindow(f"resolvent on {n} rows needs {n + 1} scalar blocks")
    if (perturbed.basis_fact is not None and scalar_system.basis_fact is not None
            and len(scalar_system.basis) >= n + 1
            and _same_basis(perturbed.basis[:n], scalar_system.basis[:n])):
        basis = scalar_system.basis
        Jb = basis_jacobi(basis, n, n + 1)
        q = p // 2
        Nblk = np.zeros((p, p))
        Nblk[:q, q:] = np.asarray(A, dtype=float)
        shift = np.kron(np.eye(n, n + 1), np.eye(p)) + np.kron(Jb, Nblk)
        Sinv = np.kron(scalar_system.basis_fact.S1_inv()[:n + 1, :n + 1], np.eye(p))
        omega = perturbed.basis_fact.S1.data[:n * p, :n * p] @ shift @ Sinv
        return BlockMatrix(p, omega)
    Sinv = np.kron(scalar_system.fact.S1_inv()[:n + 1, :n + 1], np.eye(p))
    omega = perturbed.fact.S1.data[:n * p, :n * p] @ poly_shift_window(F, n, n + 1) @ Sinv
    return BlockMatrix(p, omega)


def tridiagonal_defect(omega: BlockMatrix) -> float:
    """Largest block outside the band |k - l| <= 1."""
    worst = 0.0
    for k in range(omega.rows):
        for l in range(omega.cols):
            if abs(k - l) > 1:
                worst = max(worst, float(np.max(np.abs(omega.block(k, l)))))
    return worst
