"""
Exponential time flows of the measure and the 2D Toda equations they drive.

Times are diagonal matrices t_{i,j} = diag(t_{i,j,1}, ..., t_{i,j,p}); the
deformed measure is

    dmu(x, t) = exp(sum_j t_{1,j} x^j) dmu(x) exp(-sum_j t_{2,j} x^j).

Moments of the deformed measure are integrated directly by quadrature, so no
truncated exponential of the shift ever enters the computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .biorth import BiorthogonalSystem, system_from_factorization
from .blockmat import DEFAULT_TOL, BlockMatrix, GaussBorelFactorization, gauss_borel_factorize, shift_matrix
from .christoffel import christoffel_transform, connection_matrices
from .errors import DivergentDeformation, MatChristoffelError
from .matpoly import MatrixPolynomial, jordan_chains
from .measures import MatrixMeasure, gauss_rule, hankel

EXTRA_NODES = 40


@dataclass(frozen=True)
class TodaTimes:
    """
    Diagonals of t_{1,j} and t_{2,j}, j = 0..J, as arrays of shape (J+1, p).
    """

    t1: np.ndarray
    t2: np.ndarray

    def __post_init__(self):
        t1 = np.atleast_2d(np.asarray(self.t1, dtype=float))
        t2 = np.atleast_2d(np.asarray(self.t2, dtype=float))
        J = max(t1.shape[0], t2.shape[0])
        p = max(t1.shape[1], t2.shape[1])
        object.__setattr__(self, "t1", _pad(t1, J, p))
        object.__setattr__(self, "t2", _pad(t2, J, p))

    @classmethod
    def zero(cls, p: int, jmax: int = 1) -> "TodaTimes":
        return cls(np.zeros((jmax + 1, p)), np.zeros((jmax + 1, p)))

    @classmethod
    def scalar(cls, p: int, t1=(), t2=()) -> "TodaTimes":
        """Scalar times t_{i,j} I_p; ``t1[j-1]`` is the coefficient of x^j."""
        J = max(len(t1), len(t2))
        a, b = np.zeros((J + 1, p)), np.zeros((J + 1, p))
        for j, v in enumerate(t1, start=1):
            a[j] = v
        for j, v in enumerate(t2, start=1):
            b[j] = v
        return cls(a, b)

    @property
    def p(self) -> int:
        return self.t1.shape[1]

    @property
    def non_abelian(self) -> bool:
        """All times are multiples of the identity."""
        return bool(np.all(self.t1 == self.t1[:, :1]) and np.all(self.t2 == self.t2[:, :1]))

    def shifted(self, i: int, j: int, a: int, h: float) -> "TodaTimes":
        """Copy with t_{i,j,a} moved by h (``a = None`` moves every component)."""
        t1, t2 = self.t1.copy(), self.t2.copy()
        J = max(t1.shape[0], j + 1)
        t1, t2 = _pad(t1, J, self.p), _pad(t2, J, self.p)
        target = t1 if i == 1 else t2
        if a is None:
            target[j] += h
        else:
            target[j, a] += h
        return TodaTimes(t1, t2)

    def __add__(self, other: "TodaTimes") -> "TodaTimes":
        J = max(self.t1.shape[0], other.t1.shape[0])
        return TodaTimes(_pad(self.t1, J, self.p) + _pad(other.t1, J, self.p),
                         _pad(self.t2, J, self.p) + _pad(other.t2, J, self.p))

    def to_dict(self) -> dict:
        return {"t1": self.t1.tolist(), "t2": self.t2.tolist()}


def _pad(t: np.ndarray, J: int, p: int) -> np.ndarray:
    out = np.zeros((J, p))
    if t.shape[1] == 1 and p > 1:
        t = np.repeat(t, p, axis=1)
    out[:t.shape[0]] = t
    return out


@dataclass(frozen=True)
class TodaState:
    times: TodaTimes
    M: BlockMatrix
    fact: GaussBorelFactorization

    @property
    def H(self) -> list[np.ndarray]:
        return self.fact.H

    def system(self) -> BiorthogonalSystem:
        return system_from_factorization(self.fact, self.M)


def _check_convergence(measure: MatrixMeasure, times: TodaTimes) -> None:
    lo, hi = measure.support
    if np.isfinite(lo) and np.isfinite(hi):
        return
    # exponent of the (a,b) entry: sum_j (t1_{j,a} - t2_{j,b}) x^j plus the base weight
    base = {"hermite": {2: -1.0}, "laguerre": {1: -1.0}}[measure.base]
    p = times.p
    for a in range(p):
        for b in range(p):
            coef = {j: times.t1[j, a] - times.t2[j, b] for j in range(times.t1.shape[0])}
            for j, v in base.items():
                coef[j] = coef.get(j, 0.0) + v
            top = max((j for j, v in coef.items() if v != 0 and j > 0), default=0)
            c = coef.get(top, 0.0)
            ok = c < 0 and (np.isfinite(lo) or top % 2 == 0)
            if not ok:
                raise DivergentDeformation(
                    f"deformed weight entry ({a},{b}) is not integrable on ({lo}, {hi})")


def _deformed_density(measure, times, nodes, extra_degree, W):
    """Quadrature nodes, weights and the deformed matrix density at every node."""
    _check_convergence(measure, times)
    extra = (0 if W is None else len(W.coeffs) - 1) + measure.factor_degree
    nodes = nodes if nodes is not None else extra_degree + extra + EXTRA_NODES
    xs, ws = gauss_rule(measure.base, nodes, measure.params)
    J = times.t1.shape[0]
    blocks = []
    for x in xs:
        powers = x ** np.arange(J)
        left = np.exp(powers @ times.t1)
        right = np.exp(-(powers @ times.t2))
        mid = measure.density(x)
        if W is not None:
            mid = W(x) @ mid
        blocks.append(left[:, None] * mid * right[None, :])
    return xs, ws, blocks


def deformed_moments(measure: MatrixMeasure, times: TodaTimes, count: int,
                     nodes: int | None = None, W: MatrixPolynomial | None = None) -> list[np.ndarray]:
    """
    m_k(t) = int x^k exp(T1(x)) W(x) F(x) exp(-T2(x)) w(x) dx by the Gauss rule of the base weight.
    """
    xs, ws, blocks = _deformed_density(measure, times, nodes, count, W)
    p = measure.p
    out = [np.zeros((p, p)) for _ in range(count)]
    for x, w, block in zip(xs, ws, blocks):
        xp = 1.0
        for k in range(count):
            out[k] = out[k] + (w * xp) * block
            xp *= x
    return out


def deformed_gram(measure: MatrixMeasure, times: TodaTimes, n_blocks: int,
                  nodes: int | None = None) -> BlockMatrix:
    """
    Gram matrix of the deformed measure in the monic orthogonal basis q_k of the
    scalar base weight: block (k,l) = int q_k(x) dmu(x,t) q_l(x).

    It equals T M(t) T^T with T unit lower triangular, so its factorization has
    the same H_k as M(t), but it is far better conditioned.
    """
    from .classical import evaluate_basis, monic_basis

    q = monic_basis(measure.base, n_blocks, **measure.params)
    xs, ws, blocks = _deformed_density(measure, times, nodes, 2 * n_blocks, None)
    p = measure.p
    G = np.zeros((n_blocks * p, n_blocks * p))
    for x, w, block in zip(xs, ws, blocks):
        qx = evaluate_basis(q, x)
        G += w * np.kron(np.outer(qx, qx), block)
    return BlockMatrix(p, G)


def evolve_measure(measure: MatrixMeasure, times: TodaTimes, n_blocks: int,
                   nodes: int | None = None, tol: float = DEFAULT_TOL,
                   W: MatrixPolynomial | None = None) -> TodaState:
    """
    Moment matrix of dmu(x, t) (optionally times W(x) on the left) and its factorization.

    Raises
    ------
    DivergentDeformation
        When the deformed weight is not integrable on an unbounded support.
    """
    M = hankel(deformed_moments(measure, times, 2 * n_blocks - 1, nodes, W), n_blocks)
    return TodaState(times, M, gauss_borel_factorize(M, tol))


# -- Toda equations --------------------------------------------------------------------

def _H(measure, times, k, n_blocks, nodes):
    return gauss_borel_factorize(deformed_gram(measure, times, n_blocks, nodes)).H


def _mixed_log_derivative(measure, times, k, a, b, h, n_blocks, nodes):
    """Central-difference d/dt_{2,1,b} ( dH_k/dt_{1,1,a} H_k^{-1} )."""

    def inner(t):
        Hp = _H(measure, t.shifted(1, 1, a, h), k, n_blocks, nodes)[k]
        Hm = _H(measure, t.shifted(1, 1, a, -h), k, n_blocks, nodes)[k]
        H0 = _H(measure, t, k, n_blocks, nodes)[k]
        return np.linalg.solve(H0.T, ((Hp - Hm) / (2 * h)).T).T

    return (inner(times.shifted(2, 1, b, h)) - inner(times.shifted(2, 1, b, -h))) / (2 * h)


@dataclass(frozen=True)
class TodaResidual:
    """Max-norm residuals of the multicomponent and non-Abelian equations at degree k."""

    k: int
    h: float
    multicomponent: float
    non_abelian: float
    blocks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"k": self.k, "h": self.h, "multicomponent": self.multicomponent,
                "non_abelian": self.non_abelian}


def toda_residual(measure: MatrixMeasure, times: TodaTimes, k: int, h: float = 1e-3,
                  nodes: int | None = None) -> TodaResidual:
    """
    Residuals of

        d_{2,1,b}(d_{1,1,a} H_k H_k^{-1}) + E_aa H_{k+1} E_bb H_k^{-1} - H_k E_bb H_{k-1}^{-1} E_aa = 0

    over all (a, b), and of its non-Abelian reduction (total derivatives in
    every component at once), with central differences of step h.
    """
    if k < 1:
        raise ValueError("the Toda equations need k >= 1")
    p = measure.p
    n_blocks = k + 2
    H = _H(measure, times, k, n_blocks, nodes)
    Hk_inv = np.linalg.inv(H[k])
    Hkm_inv = np.linalg.inv(H[k - 1])
    blocks = {}
    worst = 0.0
    for a in range(p):
        Ea = np.zeros((p, p))
        Ea[a, a] = 1
        for b in range(p):
            Eb = np.zeros((p, p))
            Eb[b, b] = 1
            d = _mixed_log_derivative(measure, times, k, a, b, h, n_blocks, nodes)
            r = d + Ea @ H[k + 1] @ Eb @ Hk_inv - H[k] @ Eb @ Hkm_inv @ Ea
            blocks[(a, b)] = r
            worst = max(worst, float(np.max(np.abs(r))))
    d = _mixed_log_derivative(measure, times, k, None, None, h, n_blocks, nodes)
    r = d + H[k + 1] @ Hk_inv - H[k] @ Hkm_inv
    blocks["total"] = r
    return TodaResidual(k, h, worst, float(np.max(np.abs(r))), blocks)


# -- Lax matrices ------------------------------------------------------------------------

def lax_matrices(state: TodaState, n: int | None = None) -> tuple[BlockMatrix, BlockMatrix]:
    """
    Windows n x n of L1 = S1 Lambda S1^{-1} and L2 = S2t Lambda^T S2t^{-1}, S2t = H S2^{-T}.

    Both windows are exact truncations; they need the state factorized on n+1 blocks.
    """
    p = state.fact.p
    m = state.fact.n
    n = m - 1 if n is None else n
    if n + 1 > m:
        raise ValueError(f"Lax window {n} needs {n + 1} factorized blocks, have {m}")
    S1 = state.fact.S1.data
    L1 = S1[:n * p, :(n + 1) * p] @ shift_matrix(p, n + 1) @ state.fact.S1_inv()[:(n + 1) * p, :n * p]
    S2t = state.fact.S2_tilde()
    LT = shift_matrix(p, n + 1).T
    L2 = S2t[:n * p, :(n + 1) * p] @ LT[:, :n * p] @ np.linalg.inv(S2t[:n * p, :n * p])
    return BlockMatrix(p, L1[:, :n * p]), BlockMatrix(p, L2)


def hessenberg_defect(L: BlockMatrix, lower: bool) -> float:
    """Largest block beyond the first superdiagonal (lower) or first subdiagonal (upper)."""
    worst = 0.0
    for k in range(L.rows):
        for l in range(L.cols):
            if (lower and l > k + 1) or (not lower and k > l + 1):
                worst = max(worst, float(np.max(np.abs(L.block(k, l)))))
    return worst


def lax_defect(state: TodaState, n: int | None = None) -> float:
    """max |L1 - L2| on the interior window, relative to max |L1|."""
    L1, L2 = lax_matrices(state, n)
    return float(np.max(np.abs(L1.data - L2.data)) / max(1.0, np.max(np.abs(L1.data))))


def _lax_window(state: TodaState, m: int):
    p = state.fact.p
    S1 = state.fact.S1.data[:m * p, :m * p]
    S1i = state.fact.S1_inv()[:m * p, :m * p]
    S2t = state.fact.S2_tilde()[:m * p, :m * p]
    S2ti = np.linalg.inv(S2t)
    Lam = shift_matrix(p, m)
    return S1, S1i, S2t, S2ti, Lam


def _block_part(X: np.ndarray, p: int, upper: bool) -> np.ndarray:
    """Block upper part (with diagonal) or strictly lower part."""
    m = X.shape[0] // p
    mask = np.zeros((m, m), dtype=bool)
    idx = np.arange(m)
    mask[idx[:, None] <= idx[None, :]] = True
    if not upper:
        mask = ~mask
    return X * np.kron(mask, np.ones((p, p)))


def lax_equation_residual(measure: MatrixMeasure, times: TodaTimes, i: int, j: int, a: int,
                          n: int = 3, h: float = 1e-4, nodes: int | None = None) -> dict:
    """
    Check dL_{i'}/dt_{i,j,a} = [B_{i,j,a}, L_{i'}] for i' = 1, 2 on an n x n window.

    B_{1,j,a} = (S1 E_aa Lambda^j S1^{-1})_+, B_{2,j,a} = (S2t E_aa (Lambda^T)^j S2t^{-1})_-.
    Time derivatives are central differences of step h.
    """
    p = measure.p
    m = n + 2 * j + 3
    state = evolve_measure(measure, times, m + 1, nodes)
    S1, S1i, S2t, S2ti, Lam = _lax_window(state, m)
    E = np.kron(np.eye(m), np.diag(np.eye(p)[a]))
    Lj = np.linalg.matrix_power(Lam, j)
    if i == 1:
        B = _block_part(S1 @ E @ Lj @ S1i, p, upper=True)
    else:
        B = _block_part(S2t @ E @ Lj.T @ S2ti, p, upper=False)
    L1 = S1 @ Lam @ S1i
    L2 = S2t @ Lam.T @ S2ti
    Lp1, Lp2 = lax_matrices(evolve_measure(measure, times.shifted(i, j, a, h), m + 1, nodes), n)
    Lm1, Lm2 = lax_matrices(evolve_measure(measure, times.shifted(i, j, a, -h), m + 1, nodes), n)
    w = n * p
    out = {}
    for name, L, Lp, Lm in (("L1", L1, Lp1, Lm1), ("L2", L2, Lp2, Lm2)):
        dL = (Lp.data - Lm.data) / (2 * h)
        rhs = (B @ L - L @ B)[:w, :w]
        out[name] = float(np.max(np.abs(dL - rhs)) / max(1.0, np.max(np.abs(rhs))))
    return out


# -- Christoffel transformations along the flow ---------------------------------------------

def christoffel_flow_check(measure: MatrixMeasure, W: MatrixPolynomial, times_grid,
                           n_blocks: int = 6, ks=None, nodes: int | None = None) -> list[dict]:
    """
    At every grid point: original and perturbed systems of the deformed measure,
    their connection invariants, and agreement of the spectral Christoffel formula
    with the directly factorized perturbed system.  Failures are recorded per point.
    """
    W = W.trim()
    N = W.degree
    ks = range(n_blocks - N - 1) if ks is None else ks
    spec = jordan_chains(W)
    report = []
    for times in times_grid:
        row = {"times": times.to_dict()}
        try:
            if not times.non_abelian:
                raise ValueError("flowed Christoffel checks need scalar times")
            base = evolve_measure(measure, times, n_blocks + N, nodes).system()
            pert = evolve_measure(measure, times, n_blocks, nodes, W=W).system()
            conn = connection_matrices(base, pert, W)
            row.update(conn.residuals())
            worst_p, worst_h = 0.0, 0.0
            for k in ks:
                r = christoffel_transform(base, W, spec, k)
                ref = pert.P1[k].to_array()
                worst_p = max(worst_p, float(np.max(np.abs(r.P1.to_array() - ref)) / max(1.0, np.max(np.abs(ref)))))
                worst_h = max(worst_h, float(np.max(np.abs(r.H - pert.H[k])) / np.max(np.abs(pert.H[k]))))
            row["christoffel_P1"] = worst_p
            row["christoffel_H"] = worst_h
            row["ok"] = True
        except (MatChristoffelError, ValueError, np.linalg.LinAlgError) as exc:
            row["ok"] = False
            row["error"] = f"{type(exc).__name__}: {exc}"
        report.append(row)
    return report


def h_series(measure: MatrixMeasure, times_grid, ks, nodes: int | None = None) -> list[tuple]:
    """Rows (t, k, entry, value) of H_k along a one-parameter grid (t = t_{1,1,0})."""
    rows = []
    n_blocks = max(ks) + 1
    for times in times_grid:
        H = evolve_measure(measure, times, n_blocks, nodes).H
        t = float(times.t1[1, 0]) if times.t1.shape[0] > 1 else 0.0
        for k in ks:
            for (r, c), v in np.ndenumerate(H[k]):
                rows.append((t, k, f"{r}_{c}", float(v)))
    return rows
