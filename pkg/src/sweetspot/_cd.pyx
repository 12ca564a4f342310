# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate descent for the elastic net in covariance (Gram) form.

Minimizes ``0.5 b'Gb - q'b + l1*|b|_1 + 0.5*l2*|b|^2`` where ``G = X'X/N`` and
``q = X'y/N`` for centered data. The gradient ``q - G b`` is updated in place,
so coordinates that stay at zero cost O(1).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

cnp.import_array()


cdef inline double _soft(double z, double t) nogil:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


cdef double _sweep(const double[:, ::1] G, double[::1] grad, double[::1] beta,
                   double l1, double l2, const int[::1] idx, int m) noexcept nogil:
    """One cyclic pass over ``idx[:m]``; the gradient is kept current only
    on those same coordinates."""
    cdef int jj, j, k, kk
    cdef double gjj, old, new, d, z, denom
    cdef double max_change = 0.0
    for jj in range(m):
        j = idx[jj]
        gjj = G[j, j]
        old = beta[j]
        denom = gjj + l2
        if denom <= 0.0:
            new = 0.0
        else:
            z = grad[j] + gjj * old
            new = _soft(z, l1) / denom
        if new != old:
            d = new - old
            beta[j] = new
            for kk in range(m):
                k = idx[kk]
                grad[k] -= G[j, k] * d
            if fabs(d) > max_change:
                max_change = fabs(d)
    return max_change


cdef int _cholesky_solve(double[:, ::1] a, double[::1] b, int m) noexcept nogil:
    """Solve a x = b into ``b`` using the lower triangle of the leading m x m
    block of ``a`` (overwritten by its factor). Returns 0 when the block is
    not numerically positive definite."""
    # row-major lower triangle == column-major upper triangle
    cdef char uplo = b'U'
    cdef int lda = a.shape[1]
    cdef int nrhs = 1, info = 0, j
    cdef double lo, hi
    dpotrf(&uplo, &m, &a[0, 0], &lda, &info)
    if info != 0:
        return 0
    lo = hi = a[0, 0]
    for j in range(1, m):
        lo = min(lo, a[j, j])
        hi = max(hi, a[j, j])
    if lo <= 1e-6 * hi:
        return 0
    dpotrs(&uplo, &m, &nrhs, &a[0, 0], &lda, &b[0], &m, &info)
    return info == 0


cdef double _sparse_objective(const double[:, ::1] G, const double[::1] q, const double[::1] vals,
                              const int[::1] idx, int m, double l1, double l2) noexcept nogil:
    cdef int i, k
    cdef double quad = 0.0, lin = 0.0, l1n = 0.0, l2n = 0.0, row
    for i in range(m):
        row = 0.0
        for k in range(m):
            row += G[idx[i], idx[k]] * vals[k]
        quad += vals[i] * row
        lin += q[idx[i]] * vals[i]
        l1n += fabs(vals[i])
        l2n += vals[i] * vals[i]
    return 0.5 * quad - lin + l1 * l1n + 0.5 * l2 * l2n


cdef int _polish(const double[:, ::1] G, const double[::1] q, double[::1] grad, double[::1] beta,
                 double l1, double l2, const int[::1] active, int m,
                 double[:, ::1] work, double[::1] rhs, int[::1] act, double[::1] sgn,
                 double[::1] cur) noexcept nogil:
    """Exact solve on a face of the active orthant.

    Coefficients whose solved sign disagrees with the current sign are
    dropped and the system re-solved. The result replaces ``beta`` only if
    it does not increase the objective.
    """
    cdef int p = G.shape[0]
    cdef int i, j, k, it, m0 = m
    cdef int consistent = 0
    cdef double old_obj, new_obj
    m = 0
    for i in range(m0):
        if beta[active[i]] != 0.0:
            act[m] = active[i]
            cur[m] = beta[active[i]]
            sgn[m] = 1.0 if cur[m] > 0.0 else -1.0
            m += 1
    if m == 0:
        return 0
    old_obj = _sparse_objective(G, q, cur, act, m, l1, l2)
    for it in range(10):
        if m == 0:
            return 0
        for i in range(m):
            for j in range(i + 1):
                work[i, j] = G[act[i], act[j]]
            work[i, i] += l2
            rhs[i] = q[act[i]] - l1 * sgn[i]
        if not _cholesky_solve(work, rhs, m):
            return 0
        k = 0
        for i in range(m):
            if rhs[i] * sgn[i] > 0.0:
                act[k] = act[i]
                sgn[k] = sgn[i]
                rhs[k] = rhs[i]
                k += 1
        if k == m:
            consistent = 1
            break
        m = k
    if not consistent:
        return 0
    new_obj = _sparse_objective(G, q, rhs, act, m, l1, l2)
    if new_obj > old_obj:
        return 0
    for i in range(m0):
        beta[active[i]] = 0.0
    for i in range(m):
        beta[act[i]] = rhs[i]
    for k in range(p):
        grad[k] = q[k]
        for i in range(m):
            grad[k] -= G[act[i], k] * rhs[i]
    return 1


cdef void _refresh_grad(const double[:, ::1] G, const double[::1] q, double[::1] grad,
                        const double[::1] beta) noexcept nogil:
    cdef int p = G.shape[0]
    cdef int j, k
    for k in range(p):
        grad[k] = q[k]
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * beta[j]


cdef int _solve(const double[:, ::1] G, const double[::1] q, double[::1] grad, double[::1] beta,
                double l1, double l2, double tol, int max_sweeps,
                int[::1] all_idx, int[::1] active, double[:, ::1] work, double[::1] rhs,
                int[::1] act, double[::1] sgn, double[::1] cur, int* converged) noexcept nogil:
    cdef int p = G.shape[0]
    cdef int sweeps = 0
    cdef int m, j
    cdef double change
    cdef double trigger = 0.1
    converged[0] = 0
    while sweeps < max_sweeps:
        change = _sweep(G, grad, beta, l1, l2, all_idx, p)
        sweeps += 1
        if change < tol:
            converged[0] = 1
            break
        m = 0
        for j in range(p):
            if beta[j] != 0.0:
                active[m] = j
                m += 1
        while sweeps < max_sweeps:
            change = _sweep(G, grad, beta, l1, l2, active, m)
            sweeps += 1
            if change < tol:
                break
            if change < trigger:
                trigger *= 0.1
                if _polish(G, q, grad, beta, l1, l2, active, m, work, rhs, act, sgn, cur):
                    break
        _refresh_grad(G, q, grad, beta)
    return sweeps


def enet_gram(const double[:, ::1] G, const double[::1] q, double l1, double l2,
              double[::1] beta, double tol=1e-7, int max_sweeps=10000):
    """Solve in place from the warm start ``beta``; return (sweeps, converged)."""
    cdef int p = G.shape[0]
    cdef int conv = 0
    cdef int sweeps
    cdef double[::1] grad = np.asarray(q) - np.asarray(G) @ np.asarray(beta)
    cdef int[::1] all_idx = np.arange(p, dtype=np.intc)
    cdef int[::1] active = np.empty(p, dtype=np.intc)
    cdef double[:, ::1] work = np.empty((p, p))
    cdef double[::1] rhs = np.empty(p)
    cdef int[::1] act = np.empty(p, dtype=np.intc)
    cdef double[::1] sgn = np.empty(p)
    cdef double[::1] cur = np.empty(p)
    with nogil:
        sweeps = _solve(G, q, grad, beta, l1, l2, tol, max_sweeps, all_idx, active, work, rhs, act, sgn, cur, &conv)
    return sweeps, bool(conv)


def enet_path_gram(const double[:, ::1] G, const double[::1] q, double[::1] lambdas, double alpha,
                   double tol=1e-7, int max_sweeps=10000):
    """Warm-started solutions along a decreasing penalty path.

    Returns ``(coefs, sweeps, converged)`` with ``coefs`` of shape (L, p).
    """
    cdef int p = G.shape[0]
    cdef int L = lambdas.shape[0]
    cdef int i, j, conv = 0
    cdef double[:, ::1] coefs = np.zeros((L, p))
    cdef int[::1] sweeps = np.zeros(L, dtype=np.intc)
    cdef cnp.npy_bool[::1] converged = np.zeros(L, dtype=np.bool_)
    cdef double[::1] beta = np.zeros(p)
    cdef double[::1] grad = np.array(q, dtype=float, copy=True)
    cdef int[::1] all_idx = np.arange(p, dtype=np.intc)
    cdef int[::1] active = np.empty(p, dtype=np.intc)
    cdef double[:, ::1] work = np.empty((p, p))
    cdef double[::1] rhs = np.empty(p)
    cdef int[::1] act = np.empty(p, dtype=np.intc)
    cdef double[::1] sgn = np.empty(p)
    cdef double[::1] cur = np.empty(p)
    with nogil:
        for i in range(L):
            sweeps[i] = _solve(G, q, grad, beta, lambdas[i] * alpha, lambdas[i] * (1.0 - alpha),
                               tol, max_sweeps, all_idx, active, work, rhs, act, sgn, cur, &conv)
            converged[i] = conv
            for j in range(p):
                coefs[i, j] = beta[j]
    return np.asarray(coefs), np.asarray(sweeps), np.asarray(converged)
