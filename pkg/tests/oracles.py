"""Independent reference implementations used as test oracles."""

import numpy as np
from scipy.optimize import minimize, minimize_scalar


def dense_fourier(n):
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def dense_group_alm(F_obs, n, gamma=1.0, tol=1e-6, max_iters=20000):
    """Group-sparse extension ALM written with explicit matrices.

    Returns ``(X, iterations)``; ``iterations`` is None without convergence.
    """
    F_obs = np.atleast_2d(F_obs.T).T
    n_obs, m = F_obs.shape
    Phi = dense_fourier(n)
    P = np.diag((np.arange(n) < n_obs).astype(float))
    Pc = np.eye(n) - P
    F = np.zeros((n, m))
    F[:n_obs] = F_obs
    X = np.zeros((n, m), dtype=complex)
    Y = np.zeros_like(X)
    Q = np.zeros_like(X)
    stop = tol * np.linalg.norm(F)
    for it in range(1, max_iters + 1):
        V = Phi.conj().T @ (Y + F + Q / gamma)
        norms = np.sqrt(np.sum(np.abs(V) ** 2, axis=1))
        keep = np.maximum(norms - 1.0 / gamma, 0.0)
        X = V * np.divide(keep, norms, out=np.zeros_like(norms), where=norms > 0)[:, None]
        Y = Pc @ (Phi @ X - F - Q / gamma)
        dQ = gamma * (Y - Phi @ X + F)
        Q = Q + dQ
        if np.linalg.norm(dQ) <= stop:
            return X, it
    return X, None


def brute_group_prox(v, t, restarts=2):
    """Minimize ``t ||x|| + |x - v|^2 / 2`` with a derivative-free search."""
    v = np.asarray(v, dtype=float)

    def f(x):
        return t * np.linalg.norm(x) + 0.5 * np.sum((x - v) ** 2)

    x = v.copy()
    for _ in range(restarts):
        x = minimize(f, x, method="Nelder-Mead",
                     options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000}).x
    return x


def brute_scalar_prox(v, t):
    """Minimize ``t |x| + (x - v)^2 / 2`` by bounded scalar search."""
    r = minimize_scalar(lambda x: t * abs(x) + 0.5 * (x - v) ** 2,
                        bounds=(-abs(v) - 1.0, abs(v) + 1.0), method="bounded",
                        options={"xatol": 1e-12})
    return r.x
