"""Pure-NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Same algorithms, same signatures; slower by one to two orders of magnitude
on the small dense problems and roughly comparable on the sparse matvec.
"""

import math

import numpy as np

EPS = np.finfo(np.float64).eps
SAFMIN = np.finfo(np.float64).tiny


class ConvergenceError(ArithmeticError):
    pass


def csr_matvec(indptr, indices, data, x, out):
    n = indptr.shape[0] - 1
    prod = data * x[indices]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    out[:] = np.bincount(rows, weights=prod, minlength=n)


def _tred2(a, vectors):
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n, 1))
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            row = a[i, : l + 1]
            scale = np.abs(row).sum()
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                row /= scale
                h = float(row @ row)
                f = a[i, l]
                g = -math.sqrt(h) if f >= 0.0 else math.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                u = a[i, : l + 1].copy()
                if vectors:
                    a[: l + 1, i] = u / h
                # lower triangle of the leading block holds the current matrix
                low = np.tril(a[: l + 1, : l + 1])
                full = low + np.tril(low, -1).T
                p = full @ u / h
                e[: l + 1] = p
                f = float(p @ u)
                hh = f / (h + h)
                q = p - hh * u
                e[: l + 1] = q
                upd = np.outer(u, q) + np.outer(q, u)
                idx = np.tril_indices(l + 1)
                a[: l + 1, : l + 1][idx] -= upd[idx]
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        if vectors:
            if d[i] != 0.0:
                g = a[i, :i] @ a[:i, :i]
                a[:i, :i] -= np.outer(a[:i, i], g)
            d[i] = a[i, i]
            a[i, i] = 1.0
            a[:i, i] = 0.0
            a[i, :i] = 0.0
        else:
            d[i] = a[i, i]
    return d, e


def _tql2(d, e, zt, vectors):
    n = d.shape[0]
    if n == 0:
        return 0
    e[n - 1] = 0.0
    sweeps = 0
    cap = 30 * n
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > cap:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
                    zi = zt[i].copy()
                    zt[i] = c * zi - s * zt[i + 1]
                    zt[i + 1] = s * zi + c * zt[i + 1]
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def sym_eig(a, vectors=True):
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    d, e = _tred2(a, vectors)
    e[: n - 1] = e[1:n]
    zt = np.ascontiguousarray(a.T) if vectors else None
    if _tql2(d, e, zt, vectors) != 0:
        raise ConvergenceError("QL iteration did not converge")
    return d, zt


def tridiag_ql(d, offdiag, vectors=True):
    n = d.shape[0]
    w = np.array(d, dtype=np.float64, copy=True)
    e = np.zeros(max(n, 1))
    e[: n - 1] = offdiag
    zt = np.eye(n) if vectors else None
    if _tql2(w, e, zt, vectors) != 0:
        raise ConvergenceError("QL iteration did not converge")
    return w, zt


def _sturm_count(d, e2, x, pivmin):
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def _tridiag_solve(d, e, lam, x, tiny):
    n = d.shape[0]
    u0 = d - lam
    u1 = np.zeros(n)
    u1[: n - 1] = e[: n - 1]
    u2 = np.zeros(n)
    lmul = np.zeros(n)
    piv = np.zeros(n, dtype=bool)
    for i in range(n - 1):
        a = u0[i]
        b = e[i]
        if abs(a) >= abs(b):
            if a == 0.0:
                a = tiny
                u0[i] = tiny
            mult = b / a
            lmul[i] = mult
            u0[i + 1] -= mult * u1[i]
        else:
            piv[i] = True
            mult = a / b
            lmul[i] = mult
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
        if piv[i]:
            t = x[i]
            x[i] = x[i + 1]
            x[i + 1] = t - lmul[i] * x[i]
        else:
            x[i + 1] -= lmul[i] * x[i]
    for i in range(n - 1, -1, -1):
        t = x[i]
        if i + 1 < n:
            t -= u1[i] * x[i + 1]
        if i + 2 < n:
            t -= u2[i] * x[i + 2]
        x[i] = t / u0[i]


def tridiag_smallest(d, e, k, vectors=True):
    d = np.asarray(d, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    n = d.shape[0]
    e2 = e * e
    maxe2 = float(e2.max()) if n > 1 else 0.0
    pivmin = SAFMIN * max(maxe2, 1.0)
    radius = np.zeros(n)
    radius[1:] += np.abs(e)
    radius[:-1] += np.abs(e)
    lo = float((d - radius).min())
    hi = float((d + radius).max())
    tnorm = max(abs(lo), abs(hi)) or 1.0
    glo = lo - 2.0 * EPS * tnorm - 2.0 * pivmin
    ghi = hi + 2.0 * EPS * tnorm + 2.0 * pivmin
    w = np.zeros(k)
    for j in range(k):
        lo = glo if j == 0 else w[j - 1] - 2.0 * EPS * tnorm
        hi = ghi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= 2.0 * EPS * (abs(lo) + abs(hi)) + 0.1 * EPS * tnorm + pivmin:
                break
            if mid <= lo or mid >= hi:
                break
            if _sturm_count(d, e2, mid, pivmin) >= j + 1:
                hi = mid
            else:
                lo = mid
        w[j] = 0.5 * (lo + hi)
    if not vectors:
        return w, None
    V = np.zeros((k, n))
    ortol = 1e-3 * tnorm
    tiny = EPS * tnorm
    cluster_start = 0
    idx = np.arange(n)
    for j in range(k):
        if j > 0 and w[j] - w[j - 1] > ortol:
            cluster_start = j
        x = 1.0 + 0.5 * np.sin(1.7 * idx + 0.3 * j)
        for _ in range(4):
            x /= np.linalg.norm(x)
            _tridiag_solve(d, e, w[j], x, tiny)
            for jj in range(cluster_start, j):
                x -= (V[jj] @ x) * V[jj]
        nrm = np.linalg.norm(x)
        if x[np.argmax(np.abs(x))] < 0.0:
            nrm = -nrm
        V[j] = x / nrm
    return w, V.T.copy()
