"""Thick-restart Lanczos (Krylov-Schur) baseline."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .history import Checkpoint, ConvergenceHistory
from .lanczos import (
    Monitor,
    RitzResult,
    _finish,
    _ritz_of_T,
    _validate,
    as_operator,
    expand_step,
    init_state,
)
from .linalg import sym_eig


def ks_restart(state, ell: int, eig=None):
    """Keep the ``ell`` smallest Ritz pairs: ``Q <- Q S_ell``, ``T <- diag(theta_ell)``."""
    m = state.j
    if not 1 <= ell < m:
        raise ValueError(f"need 1 <= ell < m, got ell={ell}, m={m}")
    theta, S = eig if eig is not None else sym_eig(state.T)
    state.compress(S[:, :ell], keep_previous=False)
    state._T[:ell, :ell] = np.diag(theta[:ell])
    return state


def _restart_residual(state, k, eig):
    # |beta_m| * ||e_m^T W_k|| with W_k the k smallest eigenvectors of T_m
    _, S = eig
    return abs(state.beta_prev) * float(np.linalg.norm(S[-1, :k]))


def ks_solve(
    A,
    k: int,
    m: int,
    ell: int | None = None,
    tol_res: float = 1e-8,
    seed: int = 0,
    max_matvecs: int | None = None,
    monitor: Monitor | None = None,
    record_ritz: bool = True,
    fill_in: bool = True,
    on_step: Callable | None = None,
):
    """Krylov-Schur restarted Lanczos; restarts keep ``ell`` (default ``m // 2``) Ritz pairs.

    Returns
    -------
    RitzResult, ConvergenceHistory
    """
    op = as_operator(A)
    if ell is None:
        ell = m // 2
    _validate(op.n, k, m, tol_res, None)
    if not k <= ell < m:
        raise ValueError(f"need k <= ell < m, got k={k}, ell={ell}, m={m}")
    if max_matvecs is None:
        max_matvecs = 100 * op.n
    state = init_state(op, seed, capacity=m, fill_in=fill_in)
    hist = ConvergenceHistory("ks", op.n, k, m, tol_res, None, seed)
    threshold = tol_res * op.norm_inf
    result = None
    while state.matvecs < max_matvecs:
        expand_step(state, op)
        ritz = _ritz_of_T(state, k) if (record_ritz or monitor is not None) else []
        cp = hist.add(Checkpoint(state.matvecs, list(ritz) if record_ritz else []))
        if on_step is not None:
            on_step(state)
        if state.breakdown or state.j == m:
            eig = sym_eig(state.T)
            kk = min(k, state.j)
            est = _restart_residual(state, kk, eig)
            cp.residual_estimate = est
            if state.breakdown or est <= threshold:
                cp.event = "breakdown" if state.breakdown else "converged"
                result = _extract(state, kk, eig, est)
                result.converged = est <= threshold and kk == k
                break
        if monitor is not None and monitor(state.matvecs, np.asarray(ritz)):
            cp.event = "stopped"
            break
        if state.j == m:
            ks_restart(state, ell, eig)
            cp.event = "restart"
    if result is None:
        eig = sym_eig(state.T)
        kk = min(k, state.j)
        est = _restart_residual(state, kk, eig)
        if hist.last.residual_estimate is None:
            hist.last.residual_estimate = est
        result = _extract(state, kk, eig, est)
    return _finish(result, hist, op)


def _extract(state, k, eig, est) -> RitzResult:
    theta, S = eig
    U = state.Q_rows.T @ S[:, :k]
    return RitzResult(theta[:k].copy(), U, float(est), state.matvecs)
