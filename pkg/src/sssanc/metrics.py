"""Noise-reduction and deviation metrics, and cross-trial averaging."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import pairwise_sum

ANR_UNDEFINED = float("nan")


class AnrTracker:
    """Exponentially smoothed |e| and |d| for the averaged noise reduction."""

    def __init__(self, beta=0.999, batch_shape=()):
        if not 0 < beta < 1:
            raise ValueError("forgetting factor beta must lie in (0, 1)")
        self.beta = float(beta)
        self.A_e = np.zeros(batch_shape)
        self.A_d = np.zeros(batch_shape)

    def reset(self, mask):
        self.A_e[mask] = 0.0
        self.A_d[mask] = 0.0


def anr_step(tracker: AnrTracker, e, d):
    """Update the smoothers and return 20 log10(A_e / A_d) in dB.

    Returns ``ANR_UNDEFINED`` (NaN) wherever A_d is still zero.
    """
    b = tracker.beta
    tracker.A_e = b * tracker.A_e + (1.0 - b) * np.abs(e)
    tracker.A_d = b * tracker.A_d + (1.0 - b) * np.abs(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 20.0 * np.log10(tracker.A_e / tracker.A_d)
    return np.where(tracker.A_d > 0, out, ANR_UNDEFINED)[()]


def true_msd(w, w_opt):
    """Squared Euclidean distance between weight vectors (last axis)."""
    w = np.asarray(w, dtype=float)
    w_opt = np.asarray(w_opt, dtype=float)
    if w.shape[-1] != w_opt.shape[-1]:
        raise ValueError(f"length mismatch: {w.shape[-1]} vs {w_opt.shape[-1]}")
    diff = w - w_opt
    return pairwise_sum(diff * diff)[()]


@dataclass
class TrialAverage:
    mean: np.ndarray
    used: int
    excluded: int


def average_trials(curves, diverged=None) -> TrialAverage:
    """Pointwise mean over trials, leaving out diverged ones.

    NaN entries (e.g. undefined ANR) propagate into the mean.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("no trials to average")
    if diverged is None:
        diverged = [False] * len(curves)
    kept = [np.asarray(c, dtype=float) for c, bad in zip(curves, diverged) if not bad]
    excluded = len(curves) - len(kept)
    if not kept:
        raise ValueError(f"all {len(curves)} trials diverged")
    shape = kept[0].shape
    if any(c.shape != shape for c in kept):
        raise ValueError("trial curves differ in length")
    total = np.zeros(shape)
    for c in kept:
        total += c
    return TrialAverage(total / len(kept), len(kept), excluded)
