"""Sparse symmetric eigensolvers: Lanczos with compression and Krylov-Schur."""

__version__ = "0.1.0"

from .compare import compare, improvement, relative_ritz_error
from .compression import CompressionPlan, NoCompressionPossible, apply_compression, plan_compression, rational_krylov_basis
from .history import Checkpoint, ConvergenceHistory
from .kernels import BACKEND
from .krylov_schur import ks_restart, ks_solve
from .lanczos import (
    KrylovLikeState,
    MemoryBudgetExceeded,
    RitzResult,
    estimate_residual,
    expand_step,
    extract_ritz,
    init_state,
    lanczos_solve,
    lc_solve,
)
from .sparse import SparseMatrixCSR, gen_laplacian_L, read_matrix_market, write_matrix_market
from .zolotarev import ZolotarevFilter, build_filter, evaluate_filter, required_degree

__all__ = [
    "BACKEND",
    "Checkpoint",
    "CompressionPlan",
    "ConvergenceHistory",
    "KrylovLikeState",
    "MemoryBudgetExceeded",
    "NoCompressionPossible",
    "RitzResult",
    "SparseMatrixCSR",
    "ZolotarevFilter",
    "apply_compression",
    "build_filter",
    "compare",
    "estimate_residual",
    "evaluate_filter",
    "expand_step",
    "extract_ritz",
    "gen_laplacian_L",
    "improvement",
    "init_state",
    "ks_restart",
    "ks_solve",
    "lanczos_solve",
    "lc_solve",
    "plan_compression",
    "rational_krylov_basis",
    "read_matrix_market",
    "relative_ritz_error",
    "required_degree",
    "write_matrix_market",
]
