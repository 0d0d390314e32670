"""Closed-form FxNLMS convergence theory under a white filtered input."""
from __future__ import annotations

import numpy as np

from .errors import DomainError


def _check_L(L):
    if L < 1:
        raise DomainError(f"filter length must be >= 1, got {L}")


def convergence_factor(mu, L):
    """h = 1 - 2 mu / L + mu^2 (L + 2) / L^2."""
    _check_L(L)
    return 1.0 - 2.0 * mu / L + mu * mu * (L + 2.0) / (L * L)


def ms_stability_bound(L):
    """Upper end of the mean-square stable step-size range, 2L/(L+2)."""
    _check_L(L)
    return 2.0 * L / (L + 2.0)


def optimal_step(L):
    """Step-size minimizing the convergence factor, L/(L+2)."""
    _check_L(L)
    return L / (L + 2.0)


def theoretical_steady_msd(mu, L, sigma_e2, sigma_f2):
    """Steady-state MSD mu*sigma_e2 / (sigma_f2 * (2L - mu(L+2)))."""
    _check_L(L)
    bound = ms_stability_bound(L)
    if not 0 < mu < bound:
        raise DomainError(f"mu={mu} outside the stability region (0, {bound:.6g})")
    if not sigma_f2 > 0:
        raise DomainError("filtered-input variance must be > 0")
    if not sigma_e2 >= 0:
        raise DomainError("error power must be >= 0")
    return mu * sigma_e2 / (sigma_f2 * (2.0 * L - mu * (L + 2.0)))


def largest_eigenvalue(A, iterations=100, tol=1e-10, seed=0):
    """Power iteration for the dominant eigenvalue of a symmetric PSD matrix."""
    A = np.asarray(A, dtype=float)
    v = np.random.default_rng(seed).standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        u = A @ v
        norm = np.linalg.norm(u)
        if norm == 0:
            return 0.0
        v = u / norm
        new = float(v @ A @ v)
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


def estimate_mean_bound(x_f_samples):
    """Sample estimate of 2 / lambda_max(E{x_f x_f^T / ||x_f||^2}).

    Rows are filtered-reference vectors.  All-zero rows are ignored.
    """
    X = np.atleast_2d(np.asarray(x_f_samples, dtype=float))
    n2 = np.einsum("ij,ij->i", X, X)
    keep = n2 > 0
    if not keep.any():
        raise DomainError("all filtered-reference samples are zero")
    U = X[keep] / np.sqrt(n2[keep])[:, None]
    Lam = U.T @ U / U.shape[0]
    return 2.0 / largest_eigenvalue(Lam)
