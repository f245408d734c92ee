"""Explicit time integration of model-predicted or precomputed derivatives.

Four update rules are provided (forward Euler, 2-step Adams-Bashforth,
Heun, classical RK4) plus direct autoregressive state rollouts. Derivative
sources count their own evaluations so rollouts can report exact model
query totals.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, RolloutDivergenceError
from .model import ModelParams, NormStats, make_conditioning, predict
from .pde_data import COEFF_RANGES

EULER = "euler"
AB2 = "ab2"
HEUN = "heun"
RK4 = "rk4"
KINDS = (EULER, AB2, HEUN, RK4)

EVALS_PER_STEP = {EULER: 1, AB2: 1, HEUN: 2, RK4: 4}

FIELD_LIMIT = 1.0e6


@dataclass(frozen=True)
class CondPolicy:
    """Maps absolute rollout time to the model's scaled conditioning."""

    t_max: float
    coefficient: float | np.ndarray | None = None
    coeff_range: tuple[float, float] | None = None

    @classmethod
    def for_equation(cls, equation: str, t_max: float, coefficient=None) -> "CondPolicy":
        return cls(t_max=t_max, coefficient=coefficient, coeff_range=COEFF_RANGES.get(equation))

    def at(self, t: float):
        return make_conditioning(t, self.t_max, self.coefficient, self.coeff_range)


class ModelDerivativeSource:
    """du/dt from a trained derivative-prediction surrogate.

    Inputs are standardized and outputs un-standardized with the
    checkpoint's statistics, so the source speaks physical units.
    """

    def __init__(self, params: ModelParams, policy: CondPolicy, norm: NormStats):
        self.params = params
        self.policy = policy
        self.norm = norm
        self.evaluations = 0

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        self.evaluations += 1
        out = predict(self.params, self.norm.norm_input(u), self.policy.at(t))
        return self.norm.denorm_output(out)


class OracleDerivativeSource:
    """du/dt looked up from precomputed per-frame labels.

    Query times must coincide with stored frame times to 1e-9; off-grid
    stage times (RK4/Heun half steps) fall back to linear interpolation and
    set ``interpolated``.
    """

    def __init__(self, times: np.ndarray, dudt: np.ndarray):
        self.times = np.asarray(times, dtype=float)
        self.dudt = np.asarray(dudt, dtype=float)
        self.dt = float(self.times[1] - self.times[0])
        self.evaluations = 0
        self.interpolated = False

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        self.evaluations += 1
        pos = (t - self.times[0]) / self.dt
        idx = int(round(pos))
        if 0 <= idx < self.times.size and abs(t - self.times[idx]) < 1e-9:
            return self.dudt[idx]
        self.interpolated = True
        lo = int(np.clip(np.floor(pos), 0, self.times.size - 2))
        w = np.clip((t - self.times[lo]) / self.dt, 0.0, 1.0)
        return (1.0 - w) * self.dudt[lo] + w * self.dudt[lo + 1]


@dataclass
class RolloutState:
    """Field, clock, and the cached previous derivative (Adams only)."""

    u: np.ndarray
    t: float
    step: int = 0
    prev_deriv: np.ndarray | None = None


def _check_field(u: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > FIELD_LIMIT:
        raise RolloutDivergenceError(f"rollout diverged at step {step}", step=step)


def integrate_step(src, state: RolloutState, dt: float, kind: str) -> RolloutState:
    """Advance one step with the named rule; Adams step 0 is a Euler bootstrap."""
    if kind not in KINDS:
        raise ConfigurationError(f"unknown integrator {kind!r}")
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    u, t = state.u, state.t
    prev = None
    if kind == EULER:
        u_next = u + dt * src(u, t)
    elif kind == AB2:
        f = src(u, t)
        if state.prev_deriv is None:
            if state.step != 0:
                raise ConfigurationError("adams-bashforth cache missing after step 0")
            u_next = u + dt * f
        else:
            u_next = u + (1.5 * dt) * f - (0.5 * dt) * state.prev_deriv
        prev = f
    elif kind == HEUN:
        f1 = src(u, t)
        u_tilde = u + dt * f1
        f2 = src(u_tilde, t + dt)
        u_next = u + (0.5 * dt) * (f1 + f2)
    else:  # RK4
        k1 = src(u, t)
        k2 = src(u + (0.5 * dt) * k1, t + 0.5 * dt)
        k3 = src(u + (0.5 * dt) * k2, t + 0.5 * dt)
        k4 = src(u + dt * k3, t + dt)
        u_next = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_field(u_next, state.step)
    return RolloutState(u=u_next, t=state.t0 if False else t + dt, step=state.step + 1, prev_deriv=prev)


@dataclass
class RolloutResult:
    """Predicted frames (initial frame included) plus rollout metadata."""

    times: np.ndarray
    u: np.ndarray
    kind: str
    dt: float
    evaluations: int = 0
    wall_seconds: float = 0.0
    diverged_at: int | None = None
    interpolated_oracle: bool = False

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def rollout_derivative(
    src,
    u0: np.ndarray,
    n_steps: int,
    dt: float,
    kind: str,
    keep_every: int = 1,
    t0: float = 0.0,
) -> RolloutResult:
    """Iterate :func:`integrate_step` for ``n_steps`` from ``u0``.

    ``keep_every`` retains every k-th frame (plus the initial one), which
    implements finer-than-native stepping with comparison at the native
    resolution. Divergence halts the rollout and returns the partial result.
    """
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    u0 = np.asarray(u0, dtype=float)
    start_evals = getattr(src, "evaluations", 0)
    t_start = time.perf_counter()
    frames = [u0]
    frame_times = [t0]
    state = RolloutState(u=u0, t=t0)
    diverged_at = None
    for i in range(n_steps):
        try:
            state = integrate_step(src, state, dt, kind)
        except RolloutDivergenceError as err:
            diverged_at = err.step
            break
        # Times as multiples of dt (not accumulated) so half-step rollouts
        # reproduce native frame times bit-exactly.
        state.t = t0 + (i + 1) * dt
        if (i + 1) % keep_every == 0:
            frames.append(state.u)
            frame_times.append(state.t)
    wall = time.perf_counter() - t_start
    return RolloutResult(
        times=np.asarray(frame_times),
        u=np.stack(frames, axis=0),
        kind=kind,
        dt=dt,
        evaluations=getattr(src, "evaluations", 0) - start_evals,
        wall_seconds=wall,
        diverged_at=diverged_at,
        interpolated_oracle=getattr(src, "interpolated", False),
    )


def rollout_state(
    params: ModelParams,
    u0: np.ndarray,
    n_steps: int,
    dt: float,
    policy: CondPolicy,
    norm: NormStats,
    t0: float = 0.0,
) -> RolloutResult:
    """Autoregressive next-state rollout: one model evaluation per step."""
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    u = np.asarray(u0, dtype=float)
    t_start = time.perf_counter()
    frames = [u]
    frame_times = [t0]
    evals = 0
    diverged_at = None
    for i in range(n_steps):
        u = norm.denorm_output(predict(params, norm.norm_input(u), policy.at(t0 + i * dt)))
        evals += 1
        try:
            _check_field(u, i)
        except RolloutDivergenceError as err:
            diverged_at = err.step
            break
        frames.append(u)
        frame_times.append(t0 + (i + 1) * dt)
    wall = time.perf_counter() - t_start
    return RolloutResult(
        times=np.asarray(frame_times),
        u=np.stack(frames, axis=0),
        kind="state",
        dt=dt,
        evaluations=evals,
        wall_seconds=wall,
        diverged_at=diverged_at,
    )
