"""Seeded reference-noise generators and recorded-noise ingestion."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, IngestionError

NOISE_KINDS = ("white", "ar1", "alpha_stable", "bursty", "file")
FILE_FORMATS = ("pcm_wav", "text_lines")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream index).

    Stream ``r`` of seed ``s`` is ``SeedSequence(s).spawn(...)[r]``, so
    trial ``r`` of an experiment can be regenerated on its own.
    """

    seed: int
    stream: int = 0

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream,))

    def generator(self, substream=None) -> np.random.Generator:
        ss = self.seed_sequence()
        if substream is not None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, substream))
        return np.random.Generator(np.random.PCG64(ss))


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot derive a random generator from {type(rng).__name__}")


def _check_count(n):
    if n < 0:
        raise ConfigError("sample count must be >= 0", key="n")
    return int(n)


def gen_white(n, mean=0.0, variance=1.0, rng=None) -> np.ndarray:
    """i.i.d. Gaussian samples."""
    n = _check_count(n)
    if not variance >= 0:
        raise ConfigError("variance must be >= 0", key="variance")
    return mean + math.sqrt(variance) * _gen(rng).standard_normal(n)


def gen_ar1(n, pole=0.9, rng=None, innovation_variance=1.0) -> np.ndarray:
    """First-order autoregression x[k] = pole*x[k-1] + w[k], x[-1] = 0."""
    n = _check_count(n)
    if not abs(pole) < 1:
        raise ConfigError("AR(1) pole must satisfy |pole| < 1", key="pole")
    w = gen_white(n, 0.0, innovation_variance, rng)
    if pole == 0:
        return w
    from scipy.signal import lfilter

    return lfilter([1.0], [1.0, -pole], w)


def gen_alpha_stable(n, alpha, gamma, rng=None) -> np.ndarray:
    """Symmetric alpha-stable samples with characteristic function exp(-gamma |t|^alpha).

    Chambers-Mallows-Stuck transform of a uniform angle and a unit
    exponential, scaled by gamma**(1/alpha).
    """
    n = _check_count(n)
    if not 0 < alpha <= 2:
        raise ConfigError("alpha must lie in (0, 2]", key="alpha")
    if not gamma > 0:
        raise ConfigError("gamma must be > 0", key="gamma")
    g = _gen(rng)
    v = g.uniform(-math.pi / 2, math.pi / 2, n)
    w = g.standard_exponential(n)
    if alpha == 1:
        x = np.tan(v)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1 / alpha)
             * (np.cos(v - alpha * v) / w) ** ((1 - alpha) / alpha))
    return gamma ** (1 / alpha) * x


def gen_bursty(n, var1=1.0, var2=100.0, switch_at=None, rng=None) -> np.ndarray:
    """Zero-mean Gaussian whose variance jumps from var1 to var2 at switch_at."""
    n = _check_count(n)
    if switch_at is None:
        switch_at = n // 2
    if not 0 <= switch_at <= n:
        raise ConfigError("switch index must lie in [0, n]", key="switch_at")
    if not (var1 >= 0 and var2 >= 0):
        raise ConfigError("variances must be >= 0", key="var1/var2")
    z = _gen(rng).standard_normal(n)
    scale = np.where(np.arange(n) < switch_at, math.sqrt(var1), math.sqrt(var2))
    return scale * z


def load_noise(path, format="text_lines", noise_variance=0.0, rng=None) -> np.ndarray:
    """Read a recorded noise sequence.

    WAV files must be mono, 16-bit integer or 32-bit float PCM; integer
    samples are scaled to [-1, 1).  Text files hold one sample per line.
    White Gaussian noise of ``noise_variance`` is added when it is > 0.
    """
    path = Path(path)
    if format not in FILE_FORMATS:
        raise ConfigError(f"unknown noise file format '{format}'", key="format")
    if not path.is_file():
        raise IngestionError(f"cannot read noise file {path}: not a readable file")
    if format == "text_lines":
        samples = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                s = line.strip()
                if not s:
                    continue
                try:
                    samples.append(float(s))
                except ValueError:
                    raise IngestionError(
                        f"{path}:{lineno}: malformed sample {s!r}") from None
        x = np.array(samples, dtype=float)
    else:
        from scipy.io import wavfile

        try:
            _, data = wavfile.read(path)
        except (ValueError, OSError) as exc:
            raise IngestionError(f"{path}: malformed WAV file ({exc})") from None
        if data.ndim > 1 and data.shape[1] != 1:
            raise IngestionError(f"{path}: expected 1 channel, found {data.shape[1]}")
        data = data.reshape(-1)
        if data.dtype == np.int16:
            x = data.astype(float) / 32768.0
        elif data.dtype == np.float32:
            x = data.astype(float)
        else:
            raise IngestionError(
                f"{path}: unsupported sample type {data.dtype}; need int16 or float32 PCM")
    if not np.all(np.isfinite(x)):
        raise IngestionError(f"{path}: contains non-finite samples")
    if noise_variance:
        x = x + gen_white(x.size, 0.0, noise_variance, rng)
    return x


def empirical_cf(signal, t) -> float:
    """Real part of the empirical characteristic function, mean(cos(t*x))."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ValueError("empirical characteristic function of an empty signal")
    return float(np.mean(np.cos(t * x)))


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative description of a reference-noise source."""

    kind: str = "white"
    mean: float = 0.0
    variance: float = 1.0
    pole: float = 0.9
    alpha: float = 1.4
    gamma: float = 0.1
    var1: float = 1.0
    var2: float = 100.0
    switch_at: int | None = None
    path: str | None = None
    format: str = "text_lines"
    added_variance: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind '{self.kind}'", key="kind")
        if self.kind == "white" and not self.variance >= 0:
            raise ConfigError("variance must be >= 0", key="variance")
        if self.kind == "ar1" and not abs(self.pole) < 1:
            raise ConfigError("AR(1) pole must satisfy |pole| < 1", key="pole")
        if self.kind == "alpha_stable":
            if not 0 < self.alpha <= 2:
                raise ConfigError("alpha must lie in (0, 2]", key="alpha")
            if not self.gamma > 0:
                raise ConfigError("gamma must be > 0", key="gamma")
        if self.kind == "bursty":
            if not (self.var1 >= 0 and self.var2 >= 0):
                raise ConfigError("variances must be >= 0", key="var1")
            if self.switch_at is not None and self.switch_at < 0:
                raise ConfigError("switch index must be >= 0", key="switch_at")
        if self.kind == "file":
            if not self.path:
                raise ConfigError("file noise needs a path", key="path")
            if self.format not in FILE_FORMATS:
                raise ConfigError(f"unknown noise file format '{self.format}'", key="format")
        if not self.added_variance >= 0:
            raise ConfigError("added_variance must be >= 0", key="added_variance")

    def generate(self, n, rng) -> np.ndarray:
        g = _gen(rng)
        if self.kind == "white":
            x = gen_white(n, self.mean, self.variance, g)
        elif self.kind == "ar1":
            x = gen_ar1(n, self.pole, g)
        elif self.kind == "alpha_stable":
            x = gen_alpha_stable(n, self.alpha, self.gamma, g)
        elif self.kind == "bursty":
            x = gen_bursty(n, self.var1, self.var2, self.switch_at, g)
        else:
            x = load_noise(self.path, self.format)
            if x.size < n:
                raise IngestionError(
                    f"{self.path}: holds {x.size} samples, {n} requested")
            x = x[:n]
        if self.added_variance:
            x = x + gen_white(n, 0.0, self.added_variance, g)
        return x
