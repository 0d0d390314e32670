"""Switched step-size selection driven by per-candidate MSD trends."""
from __future__ import annotations

import warnings

import numpy as np

from .core import DEFAULT_EPSILON
from .errors import ConfigError, TrendFault
from .paths import pairwise_sum

RHO_RANGE = (0.1, 100.0)


def geometric_steps(top, count, ratio=0.5):
    """Descending candidates top, top*ratio, top*ratio**2, ..."""
    if count < 1:
        raise ConfigError("need at least one candidate step-size", key="count")
    if not 0 < ratio < 1:
        raise ConfigError("ratio must lie in (0, 1)", key="ratio")
    return tuple(top * ratio ** k for k in range(count))


def validate_candidates(candidates, L):
    mus = tuple(float(m) for m in candidates)
    if not mus:
        raise ConfigError("need at least one candidate step-size", key="step_sizes")
    bound = 2.0 * L / (L + 2.0)
    for m in mus:
        if not 0 < m < bound:
            raise ConfigError(
                f"step-size {m} outside the stability region (0, {bound:.6g}) for L={L}",
                key="step_sizes")
    if any(b >= a for a, b in zip(mus, mus[1:])):
        raise ConfigError("candidate step-sizes must be strictly decreasing", key="step_sizes")
    return mus


def _trend(Pbar, mu, R, n2, sigma_e2, g):
    ag = mu * g
    q = (mu * mu) * (g * g) / (n2 * n2)
    cross = pairwise_sum(R * Pbar)[..., None]
    return ((1.0 - 2.0 * ag * R / n2) * Pbar
            + q * sigma_e2 * R
            + 2.0 * q * R * Pbar * R
            + q * R * cross)


def msd_trend_step(Pbar, mu, x_f, sigma_e2, g=1.0, epsilon=0.0, clamp=False):
    """One step of the diagonal covariance-trend recursion for a single step-size.

    Ticks whose filtered-reference energy is <= ``epsilon`` leave the
    trend unchanged.
    """
    Pbar = np.asarray(Pbar, dtype=float)
    x_f = np.asarray(x_f, dtype=float)
    R = x_f * x_f
    n2 = pairwise_sum(R)
    live = n2 > epsilon
    n2s = np.where(live, n2, 1.0)[..., None]
    s2 = np.asarray(sigma_e2, dtype=float)[..., None]
    gg = np.asarray(g, dtype=float)[..., None]
    new = _trend(Pbar, mu, R, n2s, s2, gg)
    if clamp:
        new = np.maximum(new, 0.0)
    return np.where(live[..., None], new, Pbar)


def msd_trend_value(Pbar):
    """MSD trend J = sum of the diagonal trend vector."""
    return pairwise_sum(Pbar)


def select_step(J, candidates, check=True):
    """Candidate with the smallest trend; ties go to the smaller step-size."""
    J = np.asarray(J, dtype=float)
    mus = np.asarray(candidates, dtype=float)
    if check and not np.all(np.isfinite(J)):
        raise TrendFault("non-finite MSD trend")
    K = J.shape[-1]
    index = K - 1 - np.argmin(J[..., ::-1], axis=-1)
    return mus[index][()], index[()]


def full_matrix_msd_step(P, mu, x_f, sigma_e2, g=1.0):
    """Full weight-deviation covariance recursion (reference for the diagonal form)."""
    P = np.asarray(P, dtype=float)
    x = np.asarray(x_f, dtype=float)
    R = np.outer(x, x)
    n2 = float(x @ x)
    if n2 <= 0:
        return P.copy()
    q = mu ** 2 * g ** 2 / n2 ** 2
    RP = R @ P
    return (P - 2.0 * mu * g * RP / n2
            + q * sigma_e2 * R
            + 2.0 * q * RP @ R
            + q * R * np.trace(RP))


class SssState:
    """Per-candidate trend vectors and the current selection."""

    def __init__(self, candidates, L, rho=1.0, batch_shape=(), epsilon=DEFAULT_EPSILON,
                 clamp=False):
        self.candidates = validate_candidates(candidates, L)
        if not rho > 0:
            raise ConfigError("rho must be > 0", key="rho")
        if not RHO_RANGE[0] <= rho <= RHO_RANGE[1]:
            warnings.warn(f"rho={rho} outside the tested range {RHO_RANGE}", stacklevel=2)
        self.L = int(L)
        self.rho = float(rho)
        self.epsilon = float(epsilon)
        self.clamp = bool(clamp)
        self.batch_shape = tuple(batch_shape)
        K = len(self.candidates)
        self._mus = np.array(self.candidates)
        self.Pbar = np.full(self.batch_shape + (K, self.L), self.rho)
        self.J = msd_trend_value(self.Pbar)
        mu, self.selected = select_step(self.J, self._mus)
        self.selected = np.broadcast_to(self.selected, self.batch_shape).copy()

    @property
    def K(self):
        return len(self.candidates)

    @property
    def mu(self):
        return self._mus[self.selected]

    def reset(self, mask):
        self.Pbar[mask] = self.rho
        self.J[mask] = msd_trend_value(self.Pbar[mask])
        self.selected[mask] = self.K - 1


def sss_iteration(state: SssState, x_f, sigma_e2, g=1.0, check=True):
    """Advance all K trends, reselect, and return the step-size to use now."""
    x_f = np.asarray(x_f, dtype=float)
    R = x_f * x_f
    n2 = pairwise_sum(R)
    live = n2 > state.epsilon
    n2s = np.where(live, n2, 1.0)[..., None, None]
    s2 = np.asarray(sigma_e2, dtype=float)[..., None, None]
    gg = np.asarray(g, dtype=float)[..., None, None]
    new = _trend(state.Pbar, state._mus[:, None], R[..., None, :], n2s, s2, gg)
    if state.clamp:
        new = np.maximum(new, 0.0)
    state.Pbar = np.where(live[..., None, None], new, state.Pbar)
    state.J = msd_trend_value(state.Pbar)
    if check and not np.all(np.isfinite(state.J)):
        raise TrendFault("non-finite MSD trend")
    _, index = select_step(state.J, state._mus, check=False)
    state.selected = np.where(live, index, state.selected)
    return state._mus[state.selected][()]


class FullMsdOracle:
    """Full L x L covariance trends for every candidate; diagnostics only."""

    def __init__(self, candidates, L, rho=1.0, epsilon=DEFAULT_EPSILON):
        self.candidates = tuple(float(m) for m in candidates)
        self.epsilon = epsilon
        self.P = np.stack([rho * np.eye(L) for _ in self.candidates])
        self.selected = len(self.candidates) - 1

    @property
    def J(self):
        return np.trace(self.P, axis1=1, axis2=2)

    def step(self, x_f, sigma_e2, g=1.0):
        x_f = np.asarray(x_f, dtype=float)
        if float(x_f @ x_f) <= self.epsilon:
            return self.selected
        self.P = np.stack([full_matrix_msd_step(P, mu, x_f, sigma_e2, g)
                           for P, mu in zip(self.P, self.candidates)])
        _, self.selected = select_step(self.J, self.candidates)
        return int(self.selected)
