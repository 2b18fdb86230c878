# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Every function here has a pure-NumPy twin in ``_kernels_py`` with the same
signature and semantics; ``lancom.kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, hypot, copysign, sin

cnp.import_array()

cdef double EPS = 2.220446049250313e-16
cdef double SAFMIN = 2.2250738585072014e-308


class ConvergenceError(ArithmeticError):
    pass


def csr_matvec(const long long[::1] indptr, const long long[::1] indices,
               const double[::1] data, const double[::1] x, double[::1] out):
    """out = A @ x for a CSR matrix."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                acc = acc + data[p] * x[indices[p]]
            out[i] = acc


cdef void _tred2(double[:, ::1] a, double[::1] d, double[::1] e, bint vectors) noexcept nogil:
    # Householder reduction to tridiagonal form; on exit a holds Q (if vectors)
    # with input = Q diag-tridiag Q^T, d the diagonal, e[i] couples i-1 and i.
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double scale, hh, h, g, f
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        scale = 0.0
        if l > 0:
            for k in range(l + 1):
                scale += fabs(a[i, k])
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                for k in range(l + 1):
                    a[i, k] /= scale
                    h += a[i, k] * a[i, k]
                f = a[i, l]
                g = -sqrt(h) if f >= 0.0 else sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    if vectors:
                        a[j, i] = a[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += a[j, k] * a[i, k]
                    for k in range(j + 1, l + 1):
                        g += a[k, j] * a[i, k]
                    e[j] = g / h
                    f += e[j] * a[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = a[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        a[j, k] -= f * e[k] + g * a[i, k]
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        if vectors:
            if d[i] != 0.0:
                for j in range(i):
                    g = 0.0
                    for k in range(i):
                        g += a[i, k] * a[k, j]
                    for k in range(i):
                        a[k, j] -= g * a[k, i]
            d[i] = a[i, i]
            a[i, i] = 1.0
            for j in range(i):
                a[j, i] = 0.0
                a[i, j] = 0.0
        else:
            d[i] = a[i, i]


cdef int _tql2(double[::1] d, double[::1] e, double[:, ::1] zt, bint vectors) noexcept nogil:
    # Implicit QL with Wilkinson-type shifts on (d, e) where e[i] couples i, i+1
    # and e[n-1] is scratch. Rows of zt are rotated (zt[i] = i-th eigenvector).
    # Returns 0 on success, -1 when the sweep cap is exceeded.
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t nz = zt.shape[1] if vectors else 0
    cdef Py_ssize_t l, m, i, kk
    cdef long sweeps = 0
    cdef long cap = 30 * n
    cdef double dd, g, r, s, c, p, f, b, t
    cdef bint underflow
    if n == 0:
        return 0
    e[n - 1] = 0.0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > cap:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if vectors:
                    for kk in range(nz):
                        t = zt[i + 1, kk]
                        zt[i + 1, kk] = s * zt[i, kk] + c * t
                        zt[i, kk] = c * zt[i, kk] - s * t
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def sym_eig(double[:, ::1] a, bint vectors=True):
    """Eigen-decomposition of a dense symmetric matrix (destroys ``a``).

    Returns ``(w, zt)`` unsorted; row ``zt[i]`` is the eigenvector of ``w[i]``.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] d = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] e = np.zeros(max(n, 1))
    cdef double[::1] dv = d
    cdef double[::1] ev = e
    cdef double[:, ::1] zt
    cdef Py_ssize_t i
    cdef int info
    if n == 0:
        return d, np.zeros((0, 0))
    with nogil:
        _tred2(a, dv, ev, vectors)
        for i in range(1, n):
            ev[i - 1] = ev[i]
    if vectors:
        zt_arr = np.ascontiguousarray(np.asarray(a).T)
    else:
        zt_arr = np.zeros((1, 1))
    zt = zt_arr
    with nogil:
        info = _tql2(dv, ev, zt, vectors)
    if info != 0:
        raise ConvergenceError("QL iteration did not converge")
    return d, (zt_arr if vectors else None)


def tridiag_ql(double[::1] d, double[::1] offdiag, bint vectors=True):
    """All eigenpairs of a symmetric tridiagonal (copies inputs)."""
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[double, ndim=1] w = np.array(d, dtype=np.float64, copy=True)
    cdef cnp.ndarray[double, ndim=1] e = np.zeros(max(n, 1))
    cdef double[::1] wv = w
    cdef double[::1] ev = e
    cdef Py_ssize_t i
    cdef int info
    for i in range(n - 1):
        ev[i] = offdiag[i]
    if vectors:
        zt_arr = np.eye(n)
    else:
        zt_arr = np.zeros((1, 1))
    cdef double[:, ::1] zt = zt_arr
    with nogil:
        info = _tql2(wv, ev, zt, vectors)
    if info != 0:
        raise ConvergenceError("QL iteration did not converge")
    return w, (zt_arr if vectors else None)


cdef Py_ssize_t _sturm_count(const double[::1] d, const double[::1] e2, double x,
                             double pivmin) noexcept nogil:
    # Number of eigenvalues strictly less than x.
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, count = 0
    cdef double q = d[0] - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


cdef void _tridiag_solve(const double[::1] d, const double[::1] e, double lam,
                         double[::1] x, double[::1] u0, double[::1] u1,
                         double[::1] u2, double[::1] l, Py_ssize_t[::1] piv,
                         double tiny) noexcept nogil:
    # Solve (T - lam I) y = x in place by LU with partial pivoting.
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i
    cdef double a, b, c, mult, t
    # u0: diagonal of U, u1: first superdiag, u2: second superdiag
    for i in range(n):
        u0[i] = d[i] - lam
        u1[i] = e[i] if i < n - 1 else 0.0
        u2[i] = 0.0
    for i in range(n - 1):
        a = u0[i]
        b = e[i]  # subdiagonal entry below pivot
        if fabs(a) >= fabs(b):
            piv[i] = 0
            if a == 0.0:
                a = tiny
                u0[i] = tiny
            mult = b / a
            l[i] = mult
            u0[i + 1] -= mult * u1[i]
        else:
            piv[i] = 1
            mult = a / b
            l[i] = mult
            # swap rows i and i+1
            u0[i] = b
            t = u1[i]
            u1[i] = d[i + 1] - lam
            c = u1[i + 1] if i + 1 < n - 1 else 0.0
            u2[i] = c
            u0[i + 1] = t - mult * u1[i]
            if i + 1 < n - 1:
                u1[i + 1] = -mult * c
    if u0[n - 1] == 0.0:
        u0[n - 1] = tiny
    for i in range(n - 1):
        if piv[i] == 0:
            x[i + 1] -= l[i] * x[i]
        else:
            t = x[i]
            x[i] = x[i + 1]
            x[i + 1] = t - l[i] * x[i]
    for i in range(n - 1, -1, -1):
        t = x[i]
        if i + 1 < n:
            t -= u1[i] * x[i + 1]
        if i + 2 < n:
            t -= u2[i] * x[i + 2]
        x[i] = t / u0[i]


def tridiag_smallest(double[::1] d, double[::1] e, Py_ssize_t k, bint vectors=True):
    """k algebraically smallest eigenpairs of a symmetric tridiagonal.

    Bisection on Sturm counts, then inverse iteration with reorthogonalization
    inside clusters. Returns ``(w, V)`` with ``V`` of shape (n, k) or None.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, it, jj
    cdef cnp.ndarray[double, ndim=1] e2_arr = np.zeros(max(n - 1, 1))
    cdef double[::1] e2 = e2_arr
    cdef double lo, hi, mid, tnorm, pivmin, r, maxe2 = 0.0
    cdef cnp.ndarray[double, ndim=1] w = np.zeros(k)
    cdef double[::1] wv = w
    for i in range(n - 1):
        e2[i] = e[i] * e[i]
        if e2[i] > maxe2:
            maxe2 = e2[i]
    pivmin = SAFMIN * (maxe2 if maxe2 > 1.0 else 1.0)
    lo = d[0]
    hi = d[0]
    for i in range(n):
        r = 0.0
        if i > 0:
            r += fabs(e[i - 1])
        if i < n - 1:
            r += fabs(e[i])
        if d[i] - r < lo:
            lo = d[i] - r
        if d[i] + r > hi:
            hi = d[i] + r
    tnorm = fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)
    if tnorm == 0.0:
        tnorm = 1.0
    lo -= 2.0 * EPS * tnorm + 2.0 * pivmin
    hi += 2.0 * EPS * tnorm + 2.0 * pivmin
    cdef double glo = lo, ghi = hi
    with nogil:
        for j in range(k):
            lo = glo if j == 0 else wv[j - 1] - 2.0 * EPS * tnorm
            hi = ghi
            for it in range(200):
                mid = 0.5 * (lo + hi)
                if hi - lo <= 2.0 * EPS * (fabs(lo) + fabs(hi)) + 0.1 * EPS * tnorm + pivmin:
                    break
                if mid <= lo or mid >= hi:
                    break
                if _sturm_count(d, e2, mid, pivmin) >= j + 1:
                    hi = mid
                else:
                    lo = mid
            wv[j] = 0.5 * (lo + hi)
    if not vectors:
        return w, None

    cdef cnp.ndarray[double, ndim=2] V = np.zeros((k, n))
    cdef double[:, ::1] Vv = V
    cdef cnp.ndarray[double, ndim=1] x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] u0 = np.zeros(n)
    cdef double[::1] u1 = np.zeros(n)
    cdef double[::1] u2 = np.zeros(n)
    cdef double[::1] lmul = np.zeros(n)
    cdef Py_ssize_t[::1] piv = np.zeros(n, dtype=np.intp)
    cdef double[::1] eext = np.zeros(n)
    cdef double nrm, dot, big, lam, ortol = 1e-3 * tnorm
    cdef double tiny = EPS * tnorm
    cdef Py_ssize_t cluster_start = 0, imax
    for i in range(n - 1):
        eext[i] = e[i]
    with nogil:
        for j in range(k):
            if j > 0 and wv[j] - wv[j - 1] > ortol:
                cluster_start = j
            for i in range(n):
                x[i] = 1.0 + 0.5 * sin(1.7 * i + 0.3 * j)
            lam = wv[j]
            for it in range(4):
                nrm = 0.0
                for i in range(n):
                    nrm += x[i] * x[i]
                nrm = sqrt(nrm)
                for i in range(n):
                    x[i] /= nrm
                _tridiag_solve(d, eext, lam, x, u0, u1, u2, lmul, piv, tiny)
                for jj in range(cluster_start, j):
                    dot = 0.0
                    for i in range(n):
                        dot += Vv[jj, i] * x[i]
                    for i in range(n):
                        x[i] -= dot * Vv[jj, i]
            nrm = 0.0
            big = 0.0
            imax = 0
            for i in range(n):
                nrm += x[i] * x[i]
                if fabs(x[i]) > big:
                    big = fabs(x[i])
                    imax = i
            nrm = sqrt(nrm)
            if x[imax] < 0.0:
                nrm = -nrm
            for i in range(n):
                Vv[j, i] = x[i] / nrm
    return w, V.T.copy()
