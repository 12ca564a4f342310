"""Pure-Python coordinate descent, same algorithm and update order as ``_cd.pyx``.

Used when the compiled extension is unavailable, when
``SWEETSPOT_PURE_PYTHON=1``, and for debug runs that check the objective
after every sweep.
"""

import numpy as np
from scipy.linalg import lapack


def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def objective(G, q, beta, l1, l2):
    return 0.5 * beta @ G @ beta - q @ beta + l1 * np.abs(beta).sum() + 0.5 * l2 * beta @ beta


def _sweep(G, grad, beta, l1, l2, idx):
    # the gradient is kept current only on the swept coordinates
    idx = np.asarray(idx)
    max_change = 0.0
    for j in idx:
        gjj = G[j, j]
        old = beta[j]
        denom = gjj + l2
        new = 0.0 if denom <= 0.0 else _soft(grad[j] + gjj * old, l1) / denom
        if new != old:
            d = new - old
            beta[j] = new
            grad[idx] -= G[j, idx] * d
            max_change = max(max_change, abs(d))
    return max_change


def _cholesky_solve(a, b, m):
    # same LAPACK calls and acceptance rule as the compiled kernel
    c, info = lapack.dpotrf(a[:m, :m].T, lower=0, clean=0)
    if info != 0:
        return False
    d = np.diag(c)
    if d.min() <= 1e-6 * d.max():
        return False
    x, info = lapack.dpotrs(c, b[:m], lower=0)
    if info != 0:
        return False
    b[:m] = x
    return True


def _sparse_objective(G, q, vals, idx, l1, l2):
    quad = lin = l1n = l2n = 0.0
    m = len(idx)
    for i in range(m):
        row = 0.0
        for k in range(m):
            row += G[idx[i], idx[k]] * vals[k]
        quad += vals[i] * row
        lin += q[idx[i]] * vals[i]
        l1n += abs(vals[i])
        l2n += vals[i] * vals[i]
    return 0.5 * quad - lin + l1 * l1n + 0.5 * l2 * l2n


def _polish(G, q, grad, beta, l1, l2, active):
    act = [int(j) for j in active if beta[j] != 0.0]
    if not act:
        return False
    cur = [float(beta[j]) for j in act]
    sgn = [1.0 if v > 0.0 else -1.0 for v in cur]
    old_obj = _sparse_objective(G, q, cur, act, l1, l2)
    for _ in range(10):
        m = len(act)
        if m == 0:
            return False
        work = np.empty((m, m))
        rhs = np.empty(m)
        for i in range(m):
            for j in range(i + 1):
                work[i, j] = G[act[i], act[j]]
            work[i, i] += l2
            rhs[i] = q[act[i]] - l1 * sgn[i]
        if not _cholesky_solve(work, rhs, m):
            return False
        keep = [i for i in range(m) if rhs[i] * sgn[i] > 0.0]
        if len(keep) == m:
            break
        act = [act[i] for i in keep]
        sgn = [sgn[i] for i in keep]
    else:
        return False
    sol = [float(rhs[i]) for i in range(len(act))]
    if _sparse_objective(G, q, sol, act, l1, l2) > old_obj:
        return False
    beta[active] = 0.0
    for j, v in zip(act, sol):
        beta[j] = v
    for k in range(len(grad)):
        g = q[k]
        for i in range(len(act)):
            g -= G[act[i], k] * sol[i]
        grad[k] = g
    return True


def _refresh_grad(G, q, grad, beta):
    grad[:] = q
    for j in np.flatnonzero(beta):
        grad -= G[j] * beta[j]


def _solve(G, q, grad, beta, l1, l2, tol, max_sweeps, debug=False):
    p = G.shape[0]
    all_idx = np.arange(p)
    sweeps = 0
    trigger = 0.1
    prev = objective(G, q, beta, l1, l2) if debug else None

    def check():
        nonlocal prev
        if debug:
            cur = objective(G, q, beta, l1, l2)
            assert cur <= prev + 1e-12 * max(1.0, abs(prev)), f"objective increased: {prev} -> {cur}"
            prev = cur

    while sweeps < max_sweeps:
        change = _sweep(G, grad, beta, l1, l2, all_idx)
        sweeps += 1
        check()
        if change < tol:
            return sweeps, True
        active = np.flatnonzero(beta != 0.0)
        while sweeps < max_sweeps:
            change = _sweep(G, grad, beta, l1, l2, active)
            sweeps += 1
            check()
            if change < tol:
                break
            if change < trigger:
                trigger *= 0.1
                if _polish(G, q, grad, beta, l1, l2, active):
                    check()
                    break
        _refresh_grad(G, q, grad, beta)
    return sweeps, False


def enet_gram(G, q, l1, l2, beta, tol=1e-7, max_sweeps=10000, debug=False):
    grad = np.asarray(q, dtype=float) - G @ beta
    return _solve(G, q, grad, beta, l1, l2, tol, max_sweeps, debug=debug)


def enet_path_gram(G, q, lambdas, alpha, tol=1e-7, max_sweeps=10000):
    p = G.shape[0]
    coefs = np.zeros((len(lambdas), p))
    sweeps = np.zeros(len(lambdas), dtype=np.intc)
    converged = np.zeros(len(lambdas), dtype=bool)
    beta = np.zeros(p)
    grad = np.array(q, dtype=float, copy=True)
    for i, lam in enumerate(lambdas):
        sweeps[i], converged[i] = _solve(G, q, grad, beta, lam * alpha, lam * (1.0 - alpha), tol, max_sweeps)
        coefs[i] = beta
    return coefs, sweeps, converged
