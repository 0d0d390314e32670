"""FIR acoustic paths and streaming delay lines.

All arrays may carry leading batch axes (one row per Monte Carlo trial).
Reductions over taps go through :func:`pairwise_sum`, whose summation
order depends only on the tap count, so a trial computed alone is
bit-identical to the same trial computed inside a batch, and streaming
output is bit-identical to :func:`fir_batch`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DivergenceError

PRESETS = {
    "primary": (0.01, -0.05, 0.02, 0.75, -0.4, -0.5, -0.2, -0.05, 0.3, 0.005),
    "secondary": (0.01, -0.01, 0.9, 0.02, -0.5),
    "secondary_estimate": (-0.0455, -0.0453, 0.8683, 0.0399, -0.518),
    "identity": (1.0,),
}


def pairwise_sum(a):
    """Sum over the last axis by repeated halving.

    The association order is fixed by the axis length alone.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    if n == 0:
        return np.zeros(a.shape[:-1])
    while n > 1:
        h = (n + 1) // 2
        head = a[..., :h].copy()
        head[..., : n - h] += a[..., h:n]
        a = head
        n = h
    return a[..., 0]


def dot_last(coeffs, values):
    """Inner product over the last axis with the fixed pairwise order."""
    return pairwise_sum(np.multiply(coeffs, values))


@dataclass(frozen=True)
class FirPath:
    """Finite impulse response of an acoustic path."""

    coeffs: tuple
    name: str | None = None

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(np.asarray(self.coeffs, dtype=float)))
        if len(c) < 1:
            raise ConfigError("a path needs at least one coefficient")
        if not all(np.isfinite(c)):
            raise ConfigError("path coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def length(self) -> int:
        return len(self.coeffs)

    def asarray(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __len__(self):
        return len(self.coeffs)


def preset_path(name: str) -> FirPath:
    """Return one of the published paths: primary, secondary, secondary_estimate."""
    try:
        return FirPath(PRESETS[name], name=name)
    except KeyError:
        raise ConfigError(f"unknown path preset '{name}'; known: {sorted(PRESETS)}") from None


def unit_impulse() -> FirPath:
    return FirPath((1.0,), name="identity")


class DelayLine:
    """Ring buffer of the most recent samples, zero prehistory.

    The buffer is stored twice back to back so that the window
    ``[newest, ..., oldest]`` is always a contiguous slice.
    """

    def __init__(self, capacity: int, batch_shape=()):
        if capacity < 1:
            raise ConfigError("delay line capacity must be >= 1")
        self.capacity = int(capacity)
        self.batch_shape = tuple(batch_shape)
        self._buf = np.zeros(self.batch_shape + (2 * self.capacity,))
        self._pos = 0

    def push(self, sample):
        self._pos = (self._pos - 1) % self.capacity
        self._buf[..., self._pos] = sample
        self._buf[..., self._pos + self.capacity] = sample

    @property
    def window(self) -> np.ndarray:
        """Most-recent-first view of the stored samples."""
        return self._buf[..., self._pos : self._pos + self.capacity]

    def __getitem__(self, i):
        return self.window[..., i]

    def reset(self, mask=None):
        if mask is None:
            self._buf[...] = 0.0
            self._pos = 0
        else:
            self._buf[mask] = 0.0


def _check_finite(sample, what="sample"):
    if not np.all(np.isfinite(sample)):
        raise DivergenceError(f"non-finite {what} entering a delay line")


def fir_step(path: FirPath, line: DelayLine, sample, check=True):
    """Push one sample and return the path output for it."""
    if check:
        _check_finite(sample)
    if line.capacity < path.length:
        raise ConfigError("delay line shorter than the path")
    line.push(sample)
    return dot_last(path.asarray(), line.window[..., : path.length])


def fir_batch(path: FirPath, signal) -> np.ndarray:
    """Filter a whole 1-D signal with zero prehistory (same length out)."""
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("fir_batch expects a 1-D signal")
    if not np.all(np.isfinite(x)):
        raise DivergenceError("non-finite sample in signal")
    m = path.length
    padded = np.concatenate([np.zeros(m - 1), x])
    # row n holds x[n], x[n-1], ..., x[n-m+1]
    windows = sliding_window_view(padded, m)[:, ::-1]
    return dot_last(path.asarray(), windows)
