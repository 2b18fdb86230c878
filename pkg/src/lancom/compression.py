"""Choice of the compression basis and its application to a Krylov-like state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Breakdown, merge_orthonormal, orthonormalize_against, sym_eig
from .zolotarev import FilterDegreeError, ZolotarevFilter, build_filter, required_degree

GAP_FLOOR = 1e-13
TRUNCATION_TOL = 1e-12
COLLISION_TOL = 1e-12
COLLISION_SHIFT = 1e-8


class NoCompressionPossible(RuntimeError):
    """No admissible ``k_hat`` gives a basis smaller than the current one."""


class PoleCollision(ArithmeticError):
    pass


@dataclass
class CompressionPlan:
    k_star: int
    filter: ZolotarevFilter
    V: np.ndarray
    rational_dim: int
    dropped: int
    em_residual: float

    @property
    def ell(self) -> int:
        return self.V.shape[1]

    @property
    def retained_eigvec_count(self) -> int:
        return self.k_star


def _pair_solver(theta, S, a, b, tnorm):
    """Return ``v -> (M^{-1} v, (T - a) M^{-1} v)`` with ``M = (T - a)^2 + b^2``."""
    denom = (theta - a) ** 2 + b * b
    if denom.min() < (COLLISION_TOL * tnorm) ** 2:
        b = b + COLLISION_SHIFT * tnorm
        denom = (theta - a) ** 2 + b * b
        if denom.min() < (COLLISION_TOL * tnorm) ** 2:
            raise PoleCollision(f"pole {a}+{b}i is numerically on the spectrum")
    inv = 1.0 / denom

    def solve(v):
        c = S.T @ v
        y = S @ (inv * c)
        z = S @ ((theta - a) * inv * c)
        return y, z

    return solve


def rational_krylov_basis(T, poles, start, eig=None):
    """Orthonormal basis of the rational Krylov space ``Q(T, start, poles)``.

    The first infinite pole is taken by ``start`` itself. Conjugate pairs must
    appear next to each other; each pair contributes the real and imaginary
    parts of ``(T - xi)^{-1} v``, obtained from the real quadratic
    ``((T - a)^2 + b^2)`` diagonalized by the eigenvectors of ``T``.

    Parameters
    ----------
    T : ndarray, shape (m, m)
    poles : sequence
        Complex or ``inf`` entries.
    start : ndarray, shape (m,)
    eig : EigenPairs, optional
        Precomputed eigendecomposition of ``T``.

    Returns
    -------
    basis : ndarray, shape (m, r)
    truncated : int
        Directions dropped as numerically dependent.
    """
    T = np.asarray(T, dtype=np.float64)
    if eig is None:
        eig = sym_eig(T)
    theta, S = eig
    tnorm = max(abs(theta[0]), abs(theta[-1]), np.finfo(float).tiny)
    poles = list(poles)
    n_inf = sum(1 for z in poles if np.isinf(z))
    finite = [complex(z) for z in poles if not np.isinf(z)]
    if len(finite) % 2:
        raise ValueError("finite poles must come in conjugate pairs")
    pairs = []
    for z0, z1 in zip(finite[0::2], finite[1::2]):
        if abs(z0 - z1.conjugate()) > 1e-12 * max(1.0, abs(z0)):
            raise ValueError("finite poles must come in adjacent conjugate pairs")
        pairs.append((z0.real, abs(z0.imag)))

    m = T.shape[0]
    cols = []
    truncated = 0

    def add(x):
        nonlocal truncated
        B = np.array(cols).T if cols else np.zeros((m, 0))
        if len(cols) >= m:
            truncated += 1
            return None
        try:
            q, _ = orthonormalize_against(x, B, threshold=TRUNCATION_TOL)
        except Breakdown:
            truncated += 1
            return None
        cols.append(q)
        return q

    cont = add(np.asarray(start, dtype=np.float64))
    if cont is None:
        raise ValueError("start vector is zero")
    for a, b in pairs:
        y, z = _pair_solver(theta, S, a, b, tnorm)(cont)
        for x in (y, z):
            q = add(x)
            if q is not None:
                cont = q
    for _ in range(max(n_inf - 1, 0)):
        q = add(T @ cont)
        if q is not None:
            cont = q
    return np.array(cols).T, truncated


def _candidates(theta, k, tol_ra):
    m = theta.shape[0]
    floor = GAP_FLOOR * max(1.0, abs(theta[-1]))
    out = []
    for k_hat in range(k, m):
        gap = theta[k_hat] - theta[k - 1]
        if gap <= floor:
            continue
        tau = 0.5 * (theta[k - 1] + theta[k_hat])
        delta = 0.5 * gap
        eta = max(theta[-1] - tau, tau - theta[0])
        d = required_degree(tol_ra, delta, eta)
        out.append((k_hat + d, k_hat, d, tau, delta, eta))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def plan_compression(T, k: int, tol_ra: float, eig=None, max_tries: int | None = None) -> CompressionPlan:
    """Pick ``k_hat`` minimizing ``k_hat + d`` and build the compression basis.

    Candidates are tried in order of the objective until one yields a basis
    with fewer than ``m`` columns.

    Raises
    ------
    NoCompressionPossible
        If every gap is below the floor or no candidate shrinks the basis.
    """
    T = np.asarray(T, dtype=np.float64)
    m = T.shape[0]
    if not 1 <= k < m:
        raise ValueError(f"need 1 <= k < m, got k={k}, m={m}")
    if eig is None:
        eig = sym_eig(T)
    theta, S = eig
    em = np.zeros(m)
    em[-1] = 1.0
    cands = _candidates(theta, k, tol_ra)
    if max_tries is not None:
        cands = cands[:max_tries]
    for _, k_hat, d, tau, delta, eta in cands:
        if k_hat + 1 >= m:
            continue
        try:
            filt = build_filter(tau, delta, eta, tol_ra)
        except FilterDegreeError:
            continue
        try:
            R, _ = rational_krylov_basis(T, filt.poles(), em, eig=eig)
        except PoleCollision:
            continue
        V, dropped = merge_orthonormal(np.hstack([S[:, :k_hat], R]))
        if V.shape[1] >= m:
            continue
        resid = float(np.linalg.norm(em - V @ (V.T @ em)))
        return CompressionPlan(k_hat, filt, V, R.shape[1], dropped, resid)
    raise NoCompressionPossible(f"no compression below {m} columns for k={k}")


def apply_compression(state, plan_or_V, keep_previous: bool | None = None):
    """Replace ``Q`` by ``Q V`` and ``T`` by ``V^T T V`` in place.

    ``q_next`` is untouched. The previous Lanczos vector stays usable for the
    three-term recurrence only when ``e_m`` lies in ``range(V)``; by default
    this is decided from the plan.
    """
    if isinstance(plan_or_V, CompressionPlan):
        V = plan_or_V.V
        if keep_previous is None:
            keep_previous = plan_or_V.em_residual <= 1e-10
    else:
        V = np.asarray(plan_or_V, dtype=np.float64)
        if keep_previous is None:
            em = np.zeros(V.shape[0])
            em[-1] = 1.0
            keep_previous = float(np.linalg.norm(em - V @ (V.T @ em))) <= 1e-10
    state.compress(V, keep_previous=keep_previous)
    return state
