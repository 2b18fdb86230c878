"""Matvec-count comparisons between Lanczos with compression and Krylov-Schur."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .krylov_schur import ks_solve
from .lanczos import as_operator, default_tol_ra, lanczos_solve, lc_solve

TOLERANCE_GRID = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
DENSE_LIMIT = 2000


class ReferenceUnavailable(RuntimeError):
    pass


def relative_ritz_error(mu, lam) -> float:
    """``sum(mu - lam) / sum(lam)`` for positive ``lam``, plain ``sum(mu - lam)`` otherwise."""
    mu = np.asarray(mu, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)[: mu.shape[0]]
    err = float(np.sum(mu - lam))
    if np.all(lam > 0):
        return err / float(np.sum(lam))
    return err


def improvement(lc_matvecs, ks_matvecs) -> float:
    return 1.0 - lc_matvecs / ks_matvecs


def matvecs_to_tolerance(history, lam, tolerances=TOLERANCE_GRID) -> dict:
    """First matvec count at which the recorded Ritz values reach each tolerance."""
    k = history.k
    out = {tol: None for tol in tolerances}
    for cp in history.checkpoints:
        if len(cp.ritz) < k:
            continue
        err = relative_ritz_error(cp.ritz, lam)
        for tol in tolerances:
            if out[tol] is None and err <= tol:
                out[tol] = cp.matvecs
        if all(v is not None for v in out.values()):
            break
    return out


def reference_eigenvalues(A, k: int, seed: int = 0, tol_res: float = 1e-12) -> np.ndarray:
    """Dense spectrum for small matrices, a tight plain-Lanczos run otherwise."""
    op = as_operator(A)
    if op.n <= DENSE_LIMIT:
        M = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
        return np.linalg.eigvalsh(M)[:k]
    res, _ = lanczos_solve(op, k, tol_res=tol_res, seed=seed, record_ritz=False, check_every=10)
    if not res.converged:
        raise ReferenceUnavailable("reference Lanczos run did not converge")
    return res.values


@dataclass
class ComparisonReport:
    k: int
    m: int
    ell: int
    tol_ra: float
    seed: int
    reference: list
    tolerances: list
    lc_counts: list
    ks_counts: list
    improvements: list = field(default_factory=list)
    lc_errors: list = field(default_factory=list)
    ks_errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "ell": self.ell,
            "tol_ra": self.tol_ra,
            "seed": self.seed,
            "reference": [float(x) for x in self.reference],
            "tolerances": list(self.tolerances),
            "lc_matvecs": self.lc_counts,
            "ks_matvecs": self.ks_counts,
            "improvement": self.improvements,
            "lc_error_series": self.lc_errors,
            "ks_error_series": self.ks_errors,
        }

    def table(self) -> str:
        rows = [f"{'tol':>8} {'KS':>8} {'LC':>8} {'improvement':>12}"]
        for tol, ks, lc, imp in zip(self.tolerances, self.ks_counts, self.lc_counts, self.improvements):
            imp_s = "-" if imp is None else f"{100 * imp:.1f}%"
            rows.append(f"{tol:>8.0e} {str(ks):>8} {str(lc):>8} {imp_s:>12}")
        return "\n".join(rows)


def _error_series(history, lam):
    return [
        [cp.matvecs, relative_ritz_error(cp.ritz, lam)]
        for cp in history.checkpoints
        if len(cp.ritz) >= history.k
    ]


def compare(A, k: int, m: int = 60, ell: int | None = None, tol_ra: float | None = None,
            seed: int = 0, tolerances=TOLERANCE_GRID, max_matvecs: int | None = None,
            reference=None) -> ComparisonReport:
    """Run KS and LC from the same start vector until the tightest tolerance is met."""
    op = as_operator(A)
    ell = m // 2 if ell is None else ell
    tol_ra = default_tol_ra(k) if tol_ra is None else tol_ra
    lam = np.asarray(reference_eigenvalues(A, k, seed) if reference is None else reference)[:k]
    target = min(tolerances)
    if max_matvecs is None:
        max_matvecs = min(100 * op.n, 20_000)

    def stop(_, ritz):
        return len(ritz) >= k and relative_ritz_error(ritz, lam) <= target

    # tol_res tiny so only the monitor ends the runs
    _, h_ks = ks_solve(op, k, m, ell, tol_res=1e-15, seed=seed, max_matvecs=max_matvecs, monitor=stop)
    _, h_lc = lc_solve(op, k, m, tol_res=1e-15, tol_ra=tol_ra, seed=seed, max_matvecs=max_matvecs, monitor=stop)
    ks = matvecs_to_tolerance(h_ks, lam, tolerances)
    lc = matvecs_to_tolerance(h_lc, lam, tolerances)
    imps = [None if (ks[t] is None or lc[t] is None) else improvement(lc[t], ks[t]) for t in tolerances]
    return ComparisonReport(
        k, m, ell, tol_ra, seed, list(lam), list(tolerances),
        [lc[t] for t in tolerances], [ks[t] for t in tolerances], imps,
        _error_series(h_lc, lam), _error_series(h_ks, lam),
    )
