"""Spectral helpers for the coupling matrix A."""

import numpy as np

__all__ = ["power_opnorm", "extreme_eigvals_ata"]


def power_opnorm(M: np.ndarray, tol: float = 1e-10, max_iters: int = 10000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Stops when the eigen-residual ||Mv - lam*v|| falls below tol*max(1, lam).
    The start vector is drawn from a fixed seed, so the result is deterministic.
    """
    d = M.shape[0]
    v = np.random.default_rng(0).standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:  # M is the zero matrix
            return 0.0
        v = w / nw
        lam = float(v @ (M @ v))
        if np.linalg.norm(M @ v - lam * v) <= tol * max(1.0, lam):
            break
    return lam


def extreme_eigvals_ata(A: np.ndarray, dense_cutoff: int = 2000):
    """(smallest, largest) eigenvalue of A^T A.

    Uses a direct symmetric eigensolve up to ``dense_cutoff`` columns; beyond
    that, power iteration for the largest eigenvalue and shift-inverted power
    iteration for the smallest.
    """
    AtA = A.T @ A
    d = AtA.shape[0]
    if d <= dense_cutoff:
        w = np.linalg.eigvalsh(AtA)
        return float(w[0]), float(w[-1])
    hi = power_opnorm(AtA)
    # Inverse iteration on A^T A converges to the smallest eigenpair.
    inv = np.linalg.inv(AtA)
    lo_inv = power_opnorm(inv)
    return 1.0 / lo_inv, hi
