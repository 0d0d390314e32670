"""The per-sample filtered-x NLMS control loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError
from .paths import DelayLine, FirPath, dot_last, fir_step, pairwise_sum

DEFAULT_EPSILON = 1e-10
WEIGHT_NORM_LIMIT = 1e6
_SMALL_ERROR = 1e-8


@dataclass(frozen=True)
class ScalingKind:
    """Robust scaling of the error in the weight update.

    ``unit`` gives plain FxNLMS, ``mcc`` the Gaussian-kernel correntropy
    factor with kernel width ``sigma``, ``ehcf`` the exponential
    hyperbolic-cosine factor with parameters ``eta`` and ``theta``.
    """

    variant: str = "unit"
    sigma: float = 1.0
    eta: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if self.variant not in ("unit", "mcc", "ehcf"):
            raise ConfigError(f"unknown scaling '{self.variant}'", key="scaling")
        if self.variant == "mcc" and not self.sigma > 0:
            raise ConfigError("kernel width must be > 0", key="kernel_width")
        if self.variant == "ehcf" and not (self.eta > 0 and self.theta > 0):
            raise ConfigError("eta and theta must be > 0", key="eta/theta")

    @classmethod
    def mcc(cls, sigma=1.0):
        return cls("mcc", sigma=sigma)

    @classmethod
    def ehcf(cls, eta=1.0, theta=1.0):
        return cls("ehcf", eta=eta, theta=theta)


UNIT = ScalingKind()


def _log_cosh(a):
    a = np.abs(a)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _log_sinh_abs(a):
    a = np.abs(a)
    # only called for a >= eta * 1e-8; expm1 keeps precision near zero
    return a + np.log(-np.expm1(-2.0 * a)) - math.log(2.0)


def scaling_factor(kind: ScalingKind, e):
    """Scaling factor g[e] applied to the error in the update."""
    e = np.asarray(e, dtype=float)
    if kind.variant == "unit":
        return np.ones_like(e)[()]
    if kind.variant == "mcc":
        z = e / kind.sigma
        return np.exp(-0.5 * (z * z))[()]
    eta, theta = kind.eta, kind.theta
    a = eta * e
    small = np.abs(e) < _SMALL_ERROR
    safe_e = np.where(small, 1.0, np.abs(e))
    safe_a = np.where(small, 1.0, np.abs(a))
    # sinh(a)/e > 0 and sign(cosh) = 1, so g = exp(log|sinh| + (theta-1) log cosh - cosh^theta) / |e|
    lc = _log_cosh(safe_a)
    with np.errstate(over="ignore"):
        log_g = _log_sinh_abs(safe_a) + (theta - 1.0) * lc - np.exp(theta * lc) - np.log(safe_e)
    g = np.exp(log_g)
    return np.where(small, eta * math.exp(-1.0), g)[()]


def residual_error(d, d_hat, v=0.0):
    return d - d_hat + v


class ControllerState:
    """Adaptive weights plus the signal histories the update needs.

    ``batch_shape`` adds leading axes so many independent controllers
    advance together; ``()`` is a single controller.
    """

    def __init__(self, L: int, M: int, s_hat_length: int | None = None,
                 epsilon: float = DEFAULT_EPSILON, batch_shape=()):
        if L < 1 or M < 1:
            raise ConfigError("filter and path lengths must be >= 1")
        if not epsilon > 0:
            raise ConfigError("normalization guard must be > 0", key="epsilon")
        self.L, self.M = int(L), int(M)
        self.batch_shape = tuple(batch_shape)
        self.epsilon = float(epsilon)
        self.w = np.zeros(self.batch_shape + (self.L,))
        self.x_line = DelayLine(self.L, batch_shape)
        self.xf_line = DelayLine(self.L, batch_shape)
        self.y_line = DelayLine(self.M, batch_shape)
        self.ref_line = DelayLine(s_hat_length or self.M, batch_shape)
        self.sigma_e2 = None
        self.iteration = 0

    @property
    def x_f(self):
        return self.xf_line.window

    def xf_energy(self):
        return dot_last(self.x_f, self.x_f)

    def reset(self, mask):
        """Zero the rows selected by a boolean batch mask."""
        self.w[mask] = 0.0
        for line in (self.x_line, self.xf_line, self.y_line, self.ref_line):
            line.reset(mask)
        if self.sigma_e2 is not None:
            self.sigma_e2[mask] = 0.0


def filtered_reference_step(state: ControllerState, x_m, s_hat: FirPath, check=True):
    """Filter x_m through the secondary-path estimate and store the result."""
    xf = fir_step(s_hat, state.ref_line, x_m, check=check)
    state.xf_line.push(xf)
    return xf


def controller_output(state: ControllerState):
    return dot_last(state.w, state.x_line.window)


def weight_update(state: ControllerState, e, mu, g=1.0, check=True):
    """Normalized filtered-x update w += mu*g*e*x_f / (||x_f||^2 + eps)."""
    x_f = state.x_f
    step = np.asarray(mu) * g * e / (dot_last(x_f, x_f) + state.epsilon)
    state.w += np.asarray(step)[..., None] * x_f
    if check:
        if not np.all(np.isfinite(state.w)):
            raise DivergenceError("non-finite weights", state.iteration)
        if np.any(pairwise_sum(state.w * state.w) > WEIGHT_NORM_LIMIT ** 2):
            raise DivergenceError("weight norm above limit", state.iteration)
    return state.w


def update_error_power(state: ControllerState, e, lam=0.8):
    """Recursive error power; the first call initializes it to e**2."""
    if not 0 < lam < 1:
        raise ConfigError("forgetting factor must lie in (0, 1)", key="lambda")
    e = np.asarray(e, dtype=float)
    if state.sigma_e2 is None:
        state.sigma_e2 = e * e
    else:
        state.sigma_e2 = lam * state.sigma_e2 + (1.0 - lam) * e * e
    return state.sigma_e2


class Plant:
    """The physical side of the loop: primary and secondary acoustic paths."""

    def __init__(self, primary: FirPath, secondary: FirPath, batch_shape=()):
        self.primary = primary
        self.secondary = secondary
        self.primary_line = DelayLine(primary.length, batch_shape)

    def reset(self, mask):
        self.primary_line.reset(mask)


@dataclass
class Tick:
    e: object
    y: object
    d: object
    d_hat: object
    x_f: object
    mu: object
    g: object
    J: object = None
    index: object = None


def anc_step(plant: Plant, state: ControllerState, s_hat: FirPath, x_m, v_m=0.0,
             step=0.5, kind: ScalingKind = UNIT, lam=0.8, check=True) -> Tick:
    """Advance the loop by one sample.

    ``step`` is a fixed step-size or an :class:`~sssanc.sss.SssState`,
    in which case the switched step-size is selected this tick.
    """
    d = fir_step(plant.primary, plant.primary_line, x_m, check=check)
    state.x_line.push(x_m)
    y = controller_output(state)
    d_hat = fir_step(plant.secondary, state.y_line, y, check=check)
    e = residual_error(d, d_hat, v_m)
    x_f = filtered_reference_step(state, x_m, s_hat, check=check)
    sigma_e2 = update_error_power(state, e, lam)
    g = scaling_factor(kind, e)
    J = index = None
    if hasattr(step, "candidates"):
        from .sss import sss_iteration

        mu = sss_iteration(step, state.x_f, sigma_e2, g, check=check)
        J, index = step.J, step.selected
    else:
        mu = step
        if not mu >= 0:
            raise ConfigError("step-size must be >= 0", key="mu")
    weight_update(state, e, mu, g, check=check)
    state.iteration += 1
    return Tick(e=e, y=y, d=d, d_hat=d_hat, x_f=x_f, mu=mu, g=g, J=J, index=index)
