"""Symmetric CSR operator, Matrix Market I/O and test-matrix generators."""

from __future__ import annotations

import os

import numpy as np

from . import kernels


class SparseMatrixCSR:
    """Immutable symmetric matrix in compressed-row storage.

    Column indices are sorted within each row, duplicates summed. Symmetry is
    checked on construction: every stored ``(i, j, v)`` needs a partner
    ``(j, i, v')`` with ``|v - v'| <= sym_tol * max|v|``.
    """

    def __init__(self, n: int, indptr, indices, data, sym_tol: float = 1e-15):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if indptr.shape != (n + 1,) or indptr[0] != 0 or np.any(np.diff(indptr) < 0):
            raise ValueError("malformed row pointer")
        if indices.shape != data.shape or indices.shape[0] != indptr[-1]:
            raise ValueError("index/value length mismatch")
        if indices.size and (indices.min() < 0 or indices.max() >= n):
            raise ValueError("column index out of range")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
        indptr, indices, data = _canonical(n, rows, indices, data)
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        for arr in (self.indptr, self.indices, self.data):
            arr.setflags(write=False)
        self._check_symmetric(sym_tol)

    @classmethod
    def from_coo(cls, n, rows, cols, vals, sym_tol: float = 1e-15):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        counts = np.bincount(rows, minlength=n) if rows.size else np.zeros(n, np.int64)
        order = np.argsort(rows, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, cols[order], vals[order], sym_tol=sym_tol)

    @classmethod
    def from_dense(cls, M, sym_tol: float = 1e-15):
        M = np.asarray(M, dtype=np.float64)
        r, c = np.nonzero(M)
        return cls.from_coo(M.shape[0], r, c, M[r, c], sym_tol=sym_tol)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        return int(self.data.shape[0])

    def _rows(self):
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))

    def _check_symmetric(self, sym_tol):
        rows = self._rows()
        key = rows * self.n + self.indices
        tkey = self.indices * self.n + rows
        order = np.argsort(tkey, kind="stable")
        if not np.array_equal(tkey[order], key):
            raise ValueError("matrix is not structurally symmetric")
        scale = float(np.abs(self.data).max()) if self.data.size else 0.0
        diff = float(np.abs(self.data[order] - self.data).max()) if self.data.size else 0.0
        if diff > sym_tol * scale:
            raise ValueError(f"matrix is not symmetric (max mismatch {diff:.3e})")

    def matvec(self, x, out=None) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"dimension mismatch: expected ({self.n},), got {x.shape}")
        if out is None:
            out = np.empty(self.n)
        kernels.csr_matvec(self.indptr, self.indices, self.data, x, out)
        return out

    __matmul__ = matvec

    def toarray(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        M[self._rows(), self.indices] = self.data
        return M

    def to_scipy(self):
        import scipy.sparse as sp

        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def norm_inf(self) -> float:
        """Max absolute row sum (equals the 1-norm by symmetry)."""
        if self.n == 0:
            return 0.0
        sums = np.bincount(self._rows(), weights=np.abs(self.data), minlength=self.n)
        return float(sums.max())

    def diagonal(self) -> np.ndarray:
        rows = self._rows()
        d = np.zeros(self.n)
        mask = rows == self.indices
        d[rows[mask]] = self.data[mask]
        return d


def _canonical(n, rows, cols, vals):
    key = rows * n + cols
    order = np.argsort(key, kind="stable")
    key = key[order]
    vals = vals[order]
    uniq, start = np.unique(key, return_index=True)
    summed = np.add.reduceat(vals, start) if vals.size else vals
    r = uniq // n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
    return indptr, (uniq % n).astype(np.int64), summed.astype(np.float64)


def matvec(A: SparseMatrixCSR, x) -> np.ndarray:
    return A.matvec(x)


def read_matrix_market(path, sym_tol: float = 1e-12) -> SparseMatrixCSR:
    """Read a ``coordinate real`` Matrix Market file (symmetric or general).

    General storage must already be symmetric to ``sym_tol`` (relative to the
    largest entry); it is then averaged with its transpose.
    """
    with open(path, "r") as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0].lower() != "%%matrixmarket":
            raise ValueError("missing %%MatrixMarket header")
        obj, fmt, field, symm = (h.lower() for h in header[1:])
        if obj != "matrix" or fmt != "coordinate":
            raise ValueError("only 'matrix coordinate' files are supported")
        if field not in ("real", "double", "integer"):
            raise ValueError(f"unsupported field '{field}'")
        if symm not in ("symmetric", "general"):
            raise ValueError(f"unsupported symmetry '{symm}'")
        line = fh.readline()
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
        if not line:
            raise ValueError("missing size line")
        nr, nc, nnz = (int(t) for t in line.split())
        if nr != nc:
            raise ValueError("matrix is not square")
        body = np.loadtxt(fh, comments="%", ndmin=2) if nnz else np.zeros((0, 3))
    if body.shape[0] != nnz or (nnz and body.shape[1] != 3):
        raise ValueError("entry count does not match size line")
    rows = body[:, 0].astype(np.int64) - 1
    cols = body[:, 1].astype(np.int64) - 1
    vals = body[:, 2].astype(np.float64)
    if nnz and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= nr):
        raise ValueError("entry index out of range")
    if symm == "symmetric":
        off = rows != cols
        r = np.concatenate([rows, cols[off]])
        c = np.concatenate([cols, rows[off]])
        v = np.concatenate([vals, vals[off]])
        return SparseMatrixCSR.from_coo(nr, r, c, v)
    ip, ix, dv = _canonical(nr, rows, cols, vals)
    # compare against the transpose, then average the two
    tip, tix, tdv = _canonical(nr, cols, rows, vals)
    if not (np.array_equal(ip, tip) and np.array_equal(ix, tix)):
        raise ValueError("general-storage matrix is not structurally symmetric")
    scale = float(np.abs(dv).max()) if dv.size else 0.0
    if dv.size and float(np.abs(dv - tdv).max()) > sym_tol * scale:
        raise ValueError("general-storage matrix is not symmetric")
    return SparseMatrixCSR(nr, ip, ix, 0.5 * (dv + tdv))


def write_matrix_market(A: SparseMatrixCSR, path) -> None:
    """Write the lower triangle with ``symmetric`` storage, 17 significant digits."""
    rows = A._rows()
    mask = rows >= A.indices
    r = rows[mask]
    c = A.indices[mask]
    v = A.data[mask]
    order = np.lexsort((r, c))
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{A.n} {A.n} {r.size}\n")
        np.savetxt(fh, np.column_stack([r[order] + 1, c[order] + 1, v[order]]),
                   fmt=["%d", "%d", "%.17g"])
    os.replace(tmp, path)


def gen_laplacian_L(nx: int) -> SparseMatrixCSR:
    """Scaled 5-point Laplacian on an L-shaped grid.

    The ``nx x nx`` interior grid of the unit square loses the quadrant where
    both indices are at least ``nx/2``; points are numbered column by column.
    Diagonal ``4``, neighbour couplings ``-1``, all scaled by ``0.75 * nx**2``,
    giving order ``3 nx^2 / 4``.
    """
    if not isinstance(nx, (int, np.integer)) or nx < 2 or nx % 2:
        raise ValueError("nx must be an even integer >= 2")
    h = nx // 2
    r, c = np.meshgrid(np.arange(nx), np.arange(nx), indexing="ij")
    keep = ~((r >= h) & (c >= h))
    # column-major: order by column first, then row
    number = -np.ones((nx, nx), dtype=np.int64)
    cols_major = np.argwhere(keep.T)  # rows of (c, r) in column-major order
    n = cols_major.shape[0]
    number[cols_major[:, 1], cols_major[:, 0]] = np.arange(n)
    rows_l = [np.arange(n)]
    cols_l = [np.arange(n)]
    vals_l = [np.full(n, 4.0)]
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        rr = r + dr
        cc = c + dc
        ok = keep & (rr >= 0) & (rr < nx) & (cc >= 0) & (cc < nx)
        ok[ok] = keep[rr[ok], cc[ok]]
        rows_l.append(number[ok])
        cols_l.append(number[rr[ok], cc[ok]])
        vals_l.append(np.full(int(ok.sum()), -1.0))
    scale = 0.75 * nx * nx
    return SparseMatrixCSR.from_coo(
        n, np.concatenate(rows_l), np.concatenate(cols_l), scale * np.concatenate(vals_l)
    )


def gen_random_symmetric(n: int, nnz_per_row: int = 8, seed: int = 0, diag_shift: float = 0.0):
    """Random sparse symmetric matrix with Gaussian entries.

    Roughly ``nnz_per_row`` off-diagonal entries per row plus a Gaussian
    diagonal offset by ``diag_shift``.
    """
    rng = np.random.default_rng(seed)
    m = n * nnz_per_row // 2
    i = rng.integers(0, n, size=m)
    j = rng.integers(0, n, size=m)
    keep = i != j
    i, j = i[keep], j[keep]
    v = rng.standard_normal(i.size)
    d = rng.standard_normal(n) + diag_shift
    rows = np.concatenate([i, j, np.arange(n)])
    cols = np.concatenate([j, i, np.arange(n)])
    vals = np.concatenate([v, v, d])
    return SparseMatrixCSR.from_coo(n, rows, cols, vals)
