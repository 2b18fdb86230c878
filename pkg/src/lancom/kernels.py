"""Backend selection for the hot kernels.

The compiled extension is used when it imports cleanly. Setting
``LANCOM_PURE_PYTHON=1`` forces the NumPy fallback, which is also used
automatically when the extension was not built.
"""

import os

if os.environ.get("LANCOM_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

        BACKEND = "python"

csr_matvec = _impl.csr_matvec
sym_eig = _impl.sym_eig
tridiag_ql = _impl.tridiag_ql
tridiag_smallest = _impl.tridiag_smallest
ConvergenceError = _impl.ConvergenceError

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "csr_matvec",
    "sym_eig",
    "tridiag_ql",
    "tridiag_smallest",
]
