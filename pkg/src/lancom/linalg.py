"""Dense kernels on small projected matrices and tall basis blocks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels

DGKS_RATIO = 1.0 / math.sqrt(2.0)
MAX_PASSES = 3


class Breakdown(ArithmeticError):
    """Projection left (numerically) nothing: ``v`` lies in the span of ``Q``."""

    def __init__(self, beta: float, scale: float):
        super().__init__(f"breakdown: beta={beta:.3e} below threshold at scale {scale:.3e}")
        self.beta = beta
        self.scale = scale


@dataclass(frozen=True)
class DenseSymmetric:
    """Full storage of a symmetric matrix, symmetrized on construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("DenseSymmetric needs a nonempty square matrix")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SymTridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=np.float64)
        e = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        if d.ndim != 1 or e.ndim != 1 or e.shape[0] != max(d.shape[0] - 1, 0):
            raise ValueError("offdiag must have length len(diag) - 1")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def order(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray | None


class MergedBasis(NamedTuple):
    basis: np.ndarray
    dropped: int


def _as_array(T) -> np.ndarray:
    if isinstance(T, DenseSymmetric):
        return T.entries
    return np.asarray(T, dtype=np.float64)


def sym_eig(T, vectors: bool = True) -> EigenPairs:
    """Full eigendecomposition of a small dense symmetric matrix.

    Householder tridiagonalization followed by implicit QL. Only the lower
    triangle of ``T`` is read.

    Parameters
    ----------
    T : DenseSymmetric or array_like
        Square symmetric matrix.
    vectors : bool
        Also return eigenvectors (as columns).

    Returns
    -------
    EigenPairs
        Values ascending; vectors orthonormal, same order (None if not requested).

    Raises
    ------
    kernels.ConvergenceError
        If QL exceeds 30 sweeps per eigenvalue on average.
    """
    a = np.array(_as_array(T), dtype=np.float64, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("sym_eig needs a nonempty square matrix")
    w, zt = kernels.sym_eig(a, vectors)
    order = np.argsort(w, kind="stable")
    if not vectors:
        return EigenPairs(w[order], None)
    return EigenPairs(w[order], np.ascontiguousarray(zt[order].T))


def sym_eigvals(T) -> np.ndarray:
    return sym_eig(T, vectors=False).values


def tridiag_eig_smallest(T: SymTridiagonal, k: int, vectors: bool = True) -> EigenPairs:
    """The ``k`` algebraically smallest eigenpairs of a symmetric tridiagonal."""
    if k < 1 or k > T.order:
        raise ValueError(f"k={k} outside [1, {T.order}]")
    w, V = kernels.tridiag_smallest(T.diag, T.offdiag, k, vectors)
    return EigenPairs(w, V)


def orthonormalize_against(v, Q, threshold: float = 1e-14, scale: float | None = None):
    """Orthogonalize ``v`` against the orthonormal columns of ``Q`` and normalize.

    Classical Gram-Schmidt with a second (and at most third) pass whenever a
    pass shrinks the vector by more than a factor 1/sqrt(2).

    Parameters
    ----------
    v : ndarray, shape (n,)
    Q : ndarray, shape (n, j)
        Orthonormal columns; ``j`` may be zero.
    threshold : float
        Relative breakdown threshold.
    scale : float, optional
        Reference magnitude for the breakdown test; defaults to ``||v||``.

    Returns
    -------
    q : ndarray
        Unit vector orthogonal to ``Q``.
    beta : float
        Norm after projection, before normalization.

    Raises
    ------
    Breakdown
        If ``beta < threshold * scale``.
    """
    x = np.array(v, dtype=np.float64, copy=True)
    nrm0 = float(np.linalg.norm(x))
    if scale is None:
        scale = nrm0
    nrm = nrm0
    if Q is not None and Q.shape[1] > 0:
        for _ in range(MAX_PASSES):
            x -= Q @ (Q.T @ x)
            new = float(np.linalg.norm(x))
            done = new >= DGKS_RATIO * nrm
            nrm = new
            if done or nrm < threshold * scale:
                break
    if not nrm >= threshold * scale or nrm == 0.0:
        raise Breakdown(nrm, scale)
    return x / nrm, nrm


def merge_orthonormal(X, tol: float = 1e-12) -> MergedBasis:
    """Orthonormal basis of ``range(X)`` with near-dependent columns dropped.

    Columns are processed left to right, so a leading block that is already
    orthonormal is reproduced exactly up to rounding.
    """
    X = np.asarray(X, dtype=np.float64)
    n, c = X.shape
    if c == 0:
        return MergedBasis(np.zeros((n, 0)), 0)
    cutoff = tol * float(np.linalg.norm(X, 2))
    out = np.empty((n, c))
    j = 0
    dropped = 0
    for col in range(c):
        x = X[:, col].copy()
        nrm = float(np.linalg.norm(x))
        for _ in range(MAX_PASSES):
            if j == 0 or nrm <= cutoff:
                break
            B = out[:, :j]
            x -= B @ (B.T @ x)
            new = float(np.linalg.norm(x))
            done = new >= DGKS_RATIO * nrm
            nrm = new
            if done:
                break
        if nrm <= cutoff:
            dropped += 1
            continue
        out[:, j] = x / nrm
        j += 1
    return MergedBasis(out[:, :j].copy(), dropped)


def sym_norm2(T) -> float:
    """Spectral norm of a small symmetric matrix."""
    w = sym_eigvals(T)
    return float(max(abs(w[0]), abs(w[-1])))
