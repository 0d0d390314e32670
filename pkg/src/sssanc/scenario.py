"""Scenario files: a line-oriented ``key = value`` format under bracketed sections.

Example::

    [paths]
    primary = preset:primary
    secondary = preset:secondary

    [noise]
    kind = white
    variance = 1

    [algorithm]
    kind = sss
    step_sizes = 0.6, 0.3, 0.15, 0.075

    [run]
    filter_length = 16
    iterations = 20000

Comments start with ``#`` or ``;``.  Path values are ``preset:<name>`` or a
comma-separated coefficient list.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import DEFAULT_EPSILON, ScalingKind
from .errors import ConfigError
from .noise import NoiseSpec
from .paths import PRESETS, FirPath, preset_path, unit_impulse
from .sss import RHO_RANGE, geometric_steps, validate_candidates

ALGORITHMS = ("fxnlms_fixed", "sss", "r_sss", "r_fixed")
REQUIRED_SECTIONS = ("paths", "noise", "algorithm", "run")

_NOISE_KEYS = {
    "white": ("mean", "variance"),
    "ar1": ("pole",),
    "alpha_stable": ("alpha", "gamma"),
    "bursty": ("var1", "var2", "switch_at"),
    "file": ("path", "format"),
}
_SECTION_KEYS = {
    "paths": ("primary", "secondary", "secondary_estimate"),
    "noise": ("kind", "added_variance") + tuple(k for ks in _NOISE_KEYS.values() for k in ks),
    "algorithm": ("kind", "step_size", "step_sizes", "top_step", "count", "ratio",
                  "rho", "lambda", "scaling", "kernel_width", "eta", "theta"),
    "run": ("name", "filter_length", "iterations", "trials", "seed", "anr_beta",
            "epsilon", "measurement_noise_variance", "identification_mode",
            "clamp_trends"),
}


@dataclass(frozen=True)
class Algorithm:
    kind: str = "sss"
    step_sizes: tuple = (0.6, 0.3, 0.15, 0.075)
    rho: float = 1.0
    lam: float = 0.8
    scaling: ScalingKind = ScalingKind()

    @property
    def switched(self) -> bool:
        return self.kind in ("sss", "r_sss")

    @property
    def K(self) -> int:
        return len(self.step_sizes) if self.switched else 0


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one experiment."""

    primary: FirPath
    secondary: FirPath
    secondary_estimate: FirPath
    noise: NoiseSpec
    algorithm: Algorithm
    filter_length: int = 16
    iterations: int = 20000
    trials: int = 100
    seed: int = 0
    name: str = "scenario"
    anr_beta: float = 0.999
    epsilon: float = DEFAULT_EPSILON
    measurement_noise_variance: float = 0.0
    identification_mode: bool = False
    clamp_trends: bool = False

    def __post_init__(self):
        if self.identification_mode:
            object.__setattr__(self, "secondary", unit_impulse())
            object.__setattr__(self, "secondary_estimate", unit_impulse())
        validate(self)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def optimal_weights(self):
        """Primary coefficients padded to the filter length (identification mode)."""
        c = list(self.primary.coeffs)
        return tuple(c + [0.0] * (self.filter_length - len(c)))


def validate(s: Scenario):
    L = s.filter_length
    if L < 1:
        raise ConfigError("filter length must be >= 1", key="filter_length")
    if s.iterations < 1:
        raise ConfigError("iterations must be >= 1", key="iterations")
    if s.trials < 1:
        raise ConfigError("trials must be >= 1", key="trials")
    if not 0 < s.anr_beta < 1:
        raise ConfigError("anr_beta must lie in (0, 1)", key="anr_beta")
    if not s.epsilon > 0:
        raise ConfigError("epsilon must be > 0", key="epsilon")
    if not s.measurement_noise_variance >= 0:
        raise ConfigError("measurement noise variance must be >= 0",
                          key="measurement_noise_variance")
    if s.identification_mode and s.primary.length > L:
        raise ConfigError("identification mode needs filter_length >= primary length",
                          key="filter_length")
    a = s.algorithm
    if a.kind not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm '{a.kind}'; known: {ALGORITHMS}", key="kind")
    validate_candidates(a.step_sizes, L)
    if not a.switched and len(a.step_sizes) != 1:
        raise ConfigError("fixed-step algorithms take exactly one step-size", key="step_size")
    if a.kind in ("fxnlms_fixed", "sss") and a.scaling.variant != "unit":
        raise ConfigError(f"'{a.kind}' is non-robust; use r_{a.kind.split('_')[0]} "
                          "for robust scaling", key="scaling")
    if not 0 < a.lam < 1:
        raise ConfigError("lambda must lie in (0, 1)", key="lambda")
    if not a.rho > 0:
        raise ConfigError("rho must be > 0", key="rho")


# ---- parsing ----

def _read_sections(text):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", line=lineno)
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                raise ConfigError(f"unknown section [{current}]", line=lineno)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", line=lineno)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if current is None:
            raise ConfigError("key outside any section", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _SECTION_KEYS[current]:
            raise ConfigError(f"unknown key in [{current}]", key=key, line=lineno)
        if key in sections[current]:
            raise ConfigError("duplicate key", key=key, line=lineno)
        sections[current][key] = (value, lineno)
    return sections


class _Section:
    def __init__(self, name, items):
        self.name = name
        self.items = items
        self.used = set()

    def has(self, key):
        return key in self.items

    def line(self, key):
        return self.items[key][1] if key in self.items else None

    def _get(self, key, conv, default, required):
        if key not in self.items:
            if required:
                raise ConfigError(f"missing required key in [{self.name}]", key=key)
            return default
        self.used.add(key)
        value, lineno = self.items[key]
        try:
            return conv(value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", key=key, line=lineno) from None

    def float(self, key, default=None, required=False):
        return self._get(key, float, default, required)

    def int(self, key, default=None, required=False):
        return self._get(key, _int, default, required)

    def str(self, key, default=None, required=False):
        return self._get(key, str, default, required)

    def bool(self, key, default=False):
        return self._get(key, _bool, default, False)

    def floats(self, key, default=None, required=False):
        return self._get(key, _floats, default, required)

    def path(self, key, default=None, required=False):
        return self._get(key, _path, default, required)


def _int(s):
    try:
        return int(s)
    except ValueError:
        pass
    f = float(s)  # allows 2e4
    if not math.isfinite(f) or f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _bool(s):
    v = s.lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError("not a boolean")


def _floats(s):
    parts = [p.strip() for p in s.replace("[", "").replace("]", "").split(",")]
    if not parts or any(not p for p in parts):
        raise ValueError("empty entry in list")
    return tuple(float(p) for p in parts)


def _path(s):
    if s.startswith("preset:"):
        return preset_path(s.split(":", 1)[1].strip())
    return FirPath(_floats(s))


def _wrap(section, key, fn):
    try:
        return fn()
    except ConfigError as exc:
        if exc.line is not None:
            raise
        k = exc.key if exc.key in section.items else key
        raise ConfigError(str(exc).split(" (key")[0], key=k, line=section.line(k)) from None


def _parse_noise(noise, base_dir):
    kind = noise.str("kind", required=True)
    if kind not in _NOISE_KEYS:
        raise ConfigError(f"unknown noise kind '{kind}'", key="kind", line=noise.line("kind"))
    for key in noise.items:
        if key not in ("kind", "added_variance") + _NOISE_KEYS[kind]:
            raise ConfigError(f"not a parameter of '{kind}' noise", key=key, line=noise.line(key))
    nkw = dict(kind=kind, added_variance=noise.float("added_variance", 0.0))
    for key in _NOISE_KEYS[kind]:
        if key == "switch_at":
            nkw[key] = noise.int(key)
        elif key == "path":
            nkw[key] = noise.str(key, required=True)
        elif key == "format":
            nkw[key] = noise.str(key, "text_lines")
        else:
            value = noise.float(key)
            if value is not None:
                nkw[key] = value
    if kind == "file" and base_dir is not None and not Path(nkw["path"]).is_absolute():
        nkw["path"] = str(Path(base_dir) / nkw["path"])
    return _wrap(noise, "kind", lambda: NoiseSpec(**nkw))


def parse_noise_spec(text: str, base_dir=None) -> NoiseSpec:
    """Parse the [noise] section of a document, ignoring other sections."""
    raw = _read_sections(text)
    if "noise" not in raw:
        raise ConfigError("missing required section(s): [noise]")
    return _parse_noise(_Section("noise", raw["noise"]), base_dir)


def parse_scenario(text: str, base_dir=None) -> Scenario:
    """Parse and validate a scenario document."""
    raw = _read_sections(text)
    missing = [s for s in REQUIRED_SECTIONS if s not in raw]
    if missing:
        raise ConfigError("missing required section(s): " + ", ".join(f"[{s}]" for s in missing))
    paths, noise, alg, run = (_Section(n, raw[n]) for n in REQUIRED_SECTIONS)

    primary = paths.path("primary", required=True)
    secondary = paths.path("secondary", required=True)
    estimate = paths.path("secondary_estimate", default=secondary)

    spec = _parse_noise(noise, base_dir)

    akind = alg.str("kind", required=True)
    if akind not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm '{akind}'; known: {', '.join(ALGORITHMS)}",
                          key="kind", line=alg.line("kind"))
    L = run.int("filter_length", required=True)
    if akind in ("fxnlms_fixed", "r_fixed"):
        steps = (alg.float("step_size", required=True),)
        step_key = "step_size"
    elif alg.has("step_sizes"):
        steps = alg.floats("step_sizes")
        step_key = "step_sizes"
    else:
        top = alg.float("top_step", required=True)
        count = alg.int("count", required=True)
        ratio = alg.float("ratio", 0.5)
        steps = _wrap(alg, "ratio", lambda: geometric_steps(top, count, ratio))
        step_key = "top_step"
    _wrap(alg, step_key, lambda: validate_candidates(steps, L))
    variant = alg.str("scaling", "mcc" if akind.startswith("r_") else "unit")
    scaling = _wrap(alg, "scaling", lambda: ScalingKind(
        variant, sigma=alg.float("kernel_width", 1.0),
        eta=alg.float("eta", 1.0), theta=alg.float("theta", 1.0)))
    algorithm = Algorithm(akind, tuple(steps), rho=alg.float("rho", 1.0),
                          lam=alg.float("lambda", 0.8), scaling=scaling)
    for key in alg.items:
        if key not in alg.used:
            raise ConfigError(f"not used by algorithm '{akind}'", key=key, line=alg.line(key))

    kw = dict(
        primary=primary, secondary=secondary, secondary_estimate=estimate,
        noise=spec, algorithm=algorithm, filter_length=L,
        iterations=run.int("iterations", required=True),
        trials=run.int("trials", 100), seed=run.int("seed", 0),
        name=run.str("name", "scenario"), anr_beta=run.float("anr_beta", 0.999),
        epsilon=run.float("epsilon", DEFAULT_EPSILON),
        measurement_noise_variance=run.float("measurement_noise_variance", 0.0),
        identification_mode=run.bool("identification_mode"),
        clamp_trends=run.bool("clamp_trends"),
    )
    try:
        return Scenario(**kw)
    except ConfigError as exc:
        if exc.line is not None:
            raise
        for sec in (run, alg, noise, paths):
            if exc.key in sec.items:
                raise ConfigError(str(exc).split(" (key")[0], key=exc.key,
                                  line=sec.line(exc.key)) from None
        raise


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), base_dir=path.parent)


def _fmt_path(p: FirPath):
    if p.name in PRESETS and tuple(PRESETS[p.name]) == p.coeffs:
        return f"preset:{p.name}"
    return ", ".join(repr(c) for c in p.coeffs)


def format_scenario(s: Scenario) -> str:
    """Serialize a scenario; parsing the result gives an equal scenario."""
    out = ["[paths]",
           f"primary = {_fmt_path(s.primary)}",
           f"secondary = {_fmt_path(s.secondary)}",
           f"secondary_estimate = {_fmt_path(s.secondary_estimate)}",
           "", "[noise]", f"kind = {s.noise.kind}"]
    for key in _NOISE_KEYS[s.noise.kind]:
        value = getattr(s.noise, key)
        if value is not None:
            out.append(f"{key} = {value!r}" if not isinstance(value, str) else f"{key} = {value}")
    if s.noise.added_variance:
        out.append(f"added_variance = {s.noise.added_variance!r}")
    a = s.algorithm
    out += ["", "[algorithm]", f"kind = {a.kind}"]
    if a.switched:
        out.append("step_sizes = " + ", ".join(repr(m) for m in a.step_sizes))
    else:
        out.append(f"step_size = {a.step_sizes[0]!r}")
    out.append(f"rho = {a.rho!r}")
    out.append(f"lambda = {a.lam!r}")
    out.append(f"scaling = {a.scaling.variant}")
    if a.scaling.variant == "mcc":
        out.append(f"kernel_width = {a.scaling.sigma!r}")
    elif a.scaling.variant == "ehcf":
        out += [f"eta = {a.scaling.eta!r}", f"theta = {a.scaling.theta!r}"]
    out += ["", "[run]", f"name = {s.name}", f"filter_length = {s.filter_length}",
            f"iterations = {s.iterations}", f"trials = {s.trials}", f"seed = {s.seed}",
            f"anr_beta = {s.anr_beta!r}", f"epsilon = {s.epsilon!r}",
            f"measurement_noise_variance = {s.measurement_noise_variance!r}",
            f"identification_mode = {str(s.identification_mode).lower()}",
            f"clamp_trends = {str(s.clamp_trends).lower()}", ""]
    return "\n".join(out)
