"""Krylov-like decompositions, Lanczos with compression and plain Lanczos."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compression import NoCompressionPossible, apply_compression, plan_compression
from .history import Checkpoint, ConvergenceHistory
from .linalg import Breakdown, SymTridiagonal, orthonormalize_against, sym_eig, sym_eigvals, tridiag_eig_smallest

BREAKDOWN_TOL = 1e-14
DEFAULT_MEMORY_MB = 2048
STAGNATION_CHECKS = 3
STAGNATION_PROGRESS = 0.9

Monitor = Callable[[int, np.ndarray], bool]


class MemoryBudgetExceeded(MemoryError):
    pass


def memory_budget_bytes() -> int:
    mb = float(os.environ.get("LANCOM_MAX_MEMORY_MB", DEFAULT_MEMORY_MB))
    return int(mb * 1024 * 1024)


class Operator:
    """Uniform matvec access to a CSR matrix, a scipy sparse matrix or an ndarray."""

    def __init__(self, A):
        self.A = A
        if hasattr(A, "matvec") and hasattr(A, "norm_inf"):
            self.n = A.n
            self._apply = A.matvec
            self.norm_inf = A.norm_inf()
        else:
            self.n = A.shape[0]
            self._apply = lambda x: np.asarray(A @ x).ravel()
            self.norm_inf = float(np.max(np.asarray(abs(A).sum(axis=1)).ravel()))

    def __call__(self, x) -> np.ndarray:
        return self._apply(x)


def as_operator(A) -> Operator:
    return A if isinstance(A, Operator) else Operator(A)


def gaussian_start(n: int, seed: int) -> np.ndarray:
    """Normalized standard-normal vector from a Philox generator keyed by ``seed``."""
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


class KrylovLikeState:
    """``A Q = Q T + q_next b^T + F`` with ``F`` never formed.

    The basis is stored row-wise in a preallocated buffer, so ``Q`` (n x j) is
    a transposed view. ``b`` tracks the coupling of ``q_next`` to ``Q`` as it
    would be without fill-in; it is only read when fill-in is disabled.
    """

    def __init__(self, n: int, capacity: int, q_next: np.ndarray, scale: float, fill_in: bool = True):
        self.n = n
        self.scale = scale
        self.fill_in = fill_in
        self.capacity = 0
        self._Q = np.empty((0, n))
        self._T = np.zeros((0, 0))
        self.reserve(capacity)
        self.j = 0
        self.q_next = q_next
        self.q_prev = None
        self.beta_prev = 0.0
        self.b = np.zeros(0)
        self.alpha_hist: list = []
        self.beta_hist: list = []
        self.matvecs = 0
        self.compressions = 0
        self.breakdown = False

    def reserve(self, capacity: int) -> None:
        if capacity <= self.capacity:
            return
        need = (capacity + 3) * self.n * 8 + capacity * capacity * 8
        if need > memory_budget_bytes():
            raise MemoryBudgetExceeded(
                f"basis of {capacity} vectors of length {self.n} exceeds LANCOM_MAX_MEMORY_MB"
            )
        Q = np.empty((capacity, self.n))
        T = np.zeros((capacity, capacity))
        j = getattr(self, "j", 0)
        Q[:j] = self._Q[:j]
        T[:j, :j] = self._T[:j, :j]
        self._Q, self._T, self.capacity = Q, T, capacity

    @property
    def Q(self) -> np.ndarray:
        return self._Q[: self.j].T

    @property
    def Q_rows(self) -> np.ndarray:
        return self._Q[: self.j]

    @property
    def T(self) -> np.ndarray:
        return self._T[: self.j, : self.j]

    @property
    def basis_size(self) -> int:
        return self.j

    def compress(self, V: np.ndarray, keep_previous: bool) -> None:
        m = self.j
        if V.shape[0] != m:
            raise ValueError(f"V has {V.shape[0]} rows, basis has {m} columns")
        ell = V.shape[1]
        newQ = V.T @ self._Q[:m]
        Tm = self._T[:m, :m]
        Tn = V.T @ Tm @ V
        Tn = 0.5 * (Tn + Tn.T)
        self._T[:m, :m] = 0.0
        self._T[:ell, :ell] = Tn
        self._Q[:ell] = newQ
        self.b = V.T @ self.b
        self.j = ell
        self.compressions += 1
        if not keep_previous:
            self.q_prev = None
            self.beta_prev = 0.0

    def rayleigh_defect(self, A) -> float:
        """``||Q^T A Q - T||_2``, costing ``j`` uncounted matvecs."""
        op = as_operator(A)
        Qr = self.Q_rows
        AQ = np.array([op(q) for q in Qr])
        D = Qr @ AQ.T - self.T
        return float(np.linalg.norm(0.5 * (D + D.T), 2)) if self.j else 0.0

    def orthogonality_defect(self) -> float:
        if self.q_next is None:
            B = self.Q_rows
        else:
            B = np.vstack([self.Q_rows, self.q_next])
        return float(np.linalg.norm(B @ B.T - np.eye(B.shape[0]), 2))


def init_state(A, seed: int, capacity: int = 16, fill_in: bool = True) -> KrylovLikeState:
    op = as_operator(A)
    if op.n < 2:
        raise ValueError("need a matrix of order at least 2")
    return KrylovLikeState(op.n, capacity, gaussian_start(op.n, seed), op.norm_inf, fill_in)


def expand_step(state: KrylovLikeState, A) -> KrylovLikeState:
    """One Lanczos step with full reorthogonalization and (optionally) fill-in.

    The shadow history receives the three-term ``alpha`` and the norm of the
    three-term candidate before reorthogonalization.
    """
    if state.breakdown or state.q_next is None:
        raise RuntimeError("cannot expand after breakdown")
    j = state.j
    if j >= state.capacity:
        state.reserve(max(2 * state.capacity, j + 1))
    op = as_operator(A)
    q = state.q_next
    w = op(q)
    state.matvecs += 1
    alpha = float(q @ w)
    p = w - alpha * q
    if state.q_prev is not None:
        p -= state.beta_prev * state.q_prev
    beta_pre = float(np.linalg.norm(p))
    if state.fill_in:
        h = state._Q[:j] @ w
    else:
        h = state.b
    state._T[:j, j] = h
    state._T[j, :j] = h
    state._T[j, j] = alpha
    state._Q[j] = q
    state.j = j + 1
    state.alpha_hist.append(alpha)
    state.beta_hist.append(beta_pre)
    try:
        q_new, beta_post = orthonormalize_against(
            p, state._Q[: j + 1].T, threshold=BREAKDOWN_TOL, scale=state.scale
        )
    except Breakdown as exc:
        state.breakdown = True
        q_new, beta_post = None, exc.beta
    state.q_prev = q
    state.beta_prev = beta_post
    state.q_next = q_new
    state.b = np.zeros(j + 1)
    state.b[j] = beta_post
    return state


def estimate_residual(alpha_hist, beta_hist, k: int) -> float:
    """``|beta_i| * ||e_i^T W||`` with ``W`` the ``k`` smallest eigenvectors of the shadow tridiagonal.

    ``beta_hist[-1]`` is the current coupling ``beta_i``; the tridiagonal uses
    ``alpha_hist`` and ``beta_hist[:-1]``.
    """
    i = len(alpha_hist)
    if len(beta_hist) != i:
        raise ValueError("alpha and beta histories must have equal length")
    if i < k:
        raise ValueError(f"history of length {i} is shorter than k={k}")
    beta = abs(float(beta_hist[-1]))
    if beta == 0.0:
        return 0.0
    T = SymTridiagonal(np.asarray(alpha_hist), np.asarray(beta_hist[:-1]))
    W = tridiag_eig_smallest(T, k).vectors
    return beta * float(np.linalg.norm(W[-1]))


def shadow_ritz_values(state: KrylovLikeState, k: int) -> np.ndarray:
    i = len(state.alpha_hist)
    T = SymTridiagonal(np.asarray(state.alpha_hist), np.asarray(state.beta_hist[:-1]))
    return tridiag_eig_smallest(T, min(k, i), vectors=False).values


@dataclass
class RitzResult:
    values: np.ndarray
    vectors: np.ndarray
    residual_estimate: float
    matvec_count: int
    converged: bool = False

    def true_residual(self, A) -> float:
        """Frobenius norm of ``A U - U diag(mu)``."""
        op = as_operator(A)
        R = np.column_stack([op(u) for u in self.vectors.T]) - self.vectors * self.values
        return float(np.linalg.norm(R))


def extract_ritz(state: KrylovLikeState, k: int, residual_estimate: float | None = None) -> RitzResult:
    """The ``k`` smallest Ritz pairs of ``T`` lifted by ``Q``."""
    if state.j < k:
        raise ValueError(f"basis of size {state.j} has fewer than k={k} columns")
    vals, S = sym_eig(state.T)
    U = state.Q_rows.T @ S[:, :k]
    if residual_estimate is None:
        residual_estimate = estimate_residual(state.alpha_hist, state.beta_hist, k)
    return RitzResult(vals[:k].copy(), U, float(residual_estimate), state.matvecs)


def _ritz_of_T(state: KrylovLikeState, k: int) -> np.ndarray:
    return sym_eigvals(state.T)[: min(k, state.j)]


def _stagnating(estimates: list) -> bool:
    if len(estimates) < STAGNATION_CHECKS + 1:
        return False
    tail = estimates[-(STAGNATION_CHECKS + 1):]
    return all(b > STAGNATION_PROGRESS * a for a, b in zip(tail[:-1], tail[1:]))


def default_tol_ra(k: int) -> float:
    return 1e-6 if k <= 4 else 1e-7


def _validate(n, k, m, tol_res, tol_ra):
    if k < 1:
        raise ValueError("k must be at least 1")
    if m is not None and not k < m <= n:
        raise ValueError(f"need k < m <= n, got k={k}, m={m}, n={n}")
    if not 0.0 < tol_res < 1.0:
        raise ValueError("tol_res must lie in (0, 1)")
    if tol_ra is not None and not 0.0 < tol_ra < 1.0:
        raise ValueError("tol_ra must lie in (0, 1)")


def lc_solve(
    A,
    k: int,
    m: int,
    tol_res: float = 1e-8,
    tol_ra: float | None = None,
    seed: int = 0,
    max_matvecs: int | None = None,
    fill_in: bool = True,
    monitor: Monitor | None = None,
    record_ritz: bool = True,
    on_step: Callable | None = None,
    on_compress: Callable | None = None,
):
    """Lanczos with compression for the ``k`` smallest eigenpairs.

    Expands to ``m`` basis vectors; then either stops (residual estimate at
    most ``tol_res * ||A||_inf``) or compresses onto the filtered subspace and
    continues. Convergence is only tested when the basis is full.

    Parameters
    ----------
    A : SparseMatrixCSR, scipy sparse matrix or ndarray
    k, m : int
        Wanted eigenpairs and maximal basis size.
    tol_res : float
        Residual tolerance relative to ``||A||_inf``.
    tol_ra : float, optional
        Filter tolerance; defaults to 1e-6 for ``k <= 4`` and 1e-7 otherwise.
    seed : int
    max_matvecs : int, optional
    fill_in : bool
        Write ``Q^T A q`` into ``T``; disabling it is a diagnostic mode.
    monitor : callable, optional
        ``monitor(matvecs, ritz_values) -> bool``; returning True stops the run.
    record_ritz : bool
        Record the ``k`` smallest eigenvalues of ``T`` at every matvec.
    on_step, on_compress : callable, optional
        Hooks ``on_step(state)`` and ``on_compress(state, plan)``.

    Returns
    -------
    RitzResult, ConvergenceHistory
    """
    op = as_operator(A)
    if tol_ra is None:
        tol_ra = default_tol_ra(k)
    _validate(op.n, k, m, tol_res, tol_ra)
    if max_matvecs is None:
        max_matvecs = 100 * op.n
    state = init_state(op, seed, capacity=m, fill_in=fill_in)
    hist = ConvergenceHistory("lc", op.n, k, m, tol_res, tol_ra, seed)
    threshold = tol_res * op.norm_inf
    m_cur = m
    estimates: list = []
    result = None
    while state.matvecs < max_matvecs:
        expand_step(state, op)
        ritz = _ritz_of_T(state, k) if (record_ritz or monitor is not None) else []
        cp = hist.add(Checkpoint(state.matvecs, list(ritz) if record_ritz else []))
        if on_step is not None:
            on_step(state)
        if state.breakdown:
            est = estimate_residual(state.alpha_hist, state.beta_hist, min(k, state.j))
            cp.residual_estimate = est
            cp.event = "breakdown"
            result = extract_ritz(state, min(k, state.j), est)
            result.converged = est <= threshold
            break
        if monitor is not None and monitor(state.matvecs, np.asarray(ritz)):
            cp.event = "stopped"
            break
        if state.j < m_cur:
            continue
        est = estimate_residual(state.alpha_hist, state.beta_hist, k)
        cp.residual_estimate = est
        estimates.append(est)
        if est <= threshold:
            cp.event = "converged"
            result = extract_ritz(state, k, est)
            result.converged = True
            break
        hist.stagnated = hist.stagnated or _stagnating(estimates)
        try:
            plan = plan_compression(state.T, k, tol_ra)
        except NoCompressionPossible:
            m_cur += max(m_cur // 2, 1)
            state.reserve(m_cur)
            cp.event = "no_compression"
            continue
        apply_compression(state, plan)
        cp.event = "compress"
        cp.compression = {
            "ell": plan.ell,
            "k_hat": plan.k_star,
            "p": plan.filter.p,
            "degree_bound": plan.filter.degree_d,
            "em_residual": plan.em_residual,
        }
        if on_compress is not None:
            on_compress(state, plan)
    if result is None:
        est = estimate_residual(state.alpha_hist, state.beta_hist, min(k, state.j))
        result = extract_ritz(state, min(k, state.j), est)
        if hist.checkpoints and hist.last.residual_estimate is None:
            hist.last.residual_estimate = est
    return _finish(result, hist, op)


def _finish(result: RitzResult, hist: ConvergenceHistory, op: Operator):
    hist.converged = bool(result.converged)
    hist.final_values = [float(x) for x in result.values]
    hist.residual_true = result.true_residual(op)
    return result, hist


def lanczos_solve(
    A,
    k: int,
    tol_res: float = 1e-8,
    seed: int = 0,
    max_matvecs: int | None = None,
    monitor: Monitor | None = None,
    record_ritz: bool = True,
    check_every: int = 1,
    on_step: Callable | None = None,
):
    """Unrestarted Lanczos with full reorthogonalization.

    Ritz values and vectors come from the tridiagonal of the three-term
    coefficients; the basis grows until convergence, breakdown, the matvec
    budget or the memory budget.
    """
    op = as_operator(A)
    _validate(op.n, k, None, tol_res, None)
    if max_matvecs is None:
        max_matvecs = op.n
    state = init_state(op, seed, capacity=min(max(2 * k, 64), op.n + 1))
    hist = ConvergenceHistory("lanczos", op.n, k, None, tol_res, None, seed)
    threshold = tol_res * op.norm_inf
    converged = False
    est = None
    while state.matvecs < max_matvecs:
        if state.j >= state.capacity:
            state.reserve(min(2 * state.capacity, op.n + 1))
        expand_step(state, op)
        kk = min(k, state.j)
        ritz = shadow_ritz_values(state, kk) if (record_ritz or monitor is not None) else []
        cp = hist.add(Checkpoint(state.matvecs, list(ritz) if record_ritz else []))
        if on_step is not None:
            on_step(state)
        if state.breakdown:
            cp.event = "breakdown"
            est = estimate_residual(state.alpha_hist, state.beta_hist, kk)
            cp.residual_estimate = est
            converged = kk == k and est <= threshold
            break
        if monitor is not None and monitor(state.matvecs, np.asarray(ritz)):
            cp.event = "stopped"
            break
        if state.j >= k and state.matvecs % check_every == 0:
            est = estimate_residual(state.alpha_hist, state.beta_hist, k)
            cp.residual_estimate = est
            if est <= threshold:
                cp.event = "converged"
                converged = True
                break
    kk = min(k, state.j)
    if est is None or hist.last.residual_estimate is None:
        est = estimate_residual(state.alpha_hist, state.beta_hist, kk)
        hist.last.residual_estimate = est
    T = SymTridiagonal(np.asarray(state.alpha_hist), np.asarray(state.beta_hist[:-1]))
    vals, W = tridiag_eig_smallest(T, kk)
    U = state.Q_rows.T @ W
    result = RitzResult(vals, U, est, state.matvecs, converged)
    return _finish(result, hist, op)
