"""Ground-truth trajectory generation for 1D periodic PDEs.

Three equations are supported on the periodic domain [0, L):

* advection   du/dt + c du/dx = 0          (solved exactly in Fourier space)
* heat        du/dt - nu d2u/dx2 = 0       (solved exactly in Fourier space)
* ks          du/dt + u du/dx + d2u/dx2 + d4u/dx4 = 0
              (pseudospectral ETDRK4 with 2/3-rule dealiasing)

Initial conditions are random sums of sines; all sampling is a pure
function of the supplied seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, SolverDivergenceError

ADVECTION = "advection"
HEAT = "heat"
KS = "ks"
EQUATIONS = (ADVECTION, HEAT, KS)

# Uniform sampling ranges for per-sample equation coefficients.
COEFF_RANGES = {ADVECTION: (0.1, 2.5), HEAT: (0.1, 0.8)}

# Fields whose max-abs exceeds this are treated as a solver blow-up.
BLOWUP_LIMIT = 1.0e6

# Number of roots of unity used for the contour-integral evaluation of the
# ETDRK4 phi-function coefficients.
ETDRK4_CONTOUR_POINTS = 32


@dataclass(frozen=True)
class SpatialGrid1D:
    """Uniform periodic grid with node m at x_m = m * dx, dx = length / n_x."""

    n_x: int
    length: float = 16.0

    def __post_init__(self):
        if self.n_x < 16 or (self.n_x & (self.n_x - 1)) != 0:
            raise ConfigurationError(f"n_x must be a power of two >= 16, got {self.n_x}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_x

    @property
    def nodes(self) -> np.ndarray:
        return self.dx * np.arange(self.n_x)

    def wavenumbers(self) -> np.ndarray:
        """Physical rfft wavenumbers k_m = 2*pi*m/L (Nyquist bin included)."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n_x, d=self.dx)


@dataclass(frozen=True)
class InitialConditionSpec:
    """Random sum-of-sines field: sum_j A_j sin(2*pi*l_j*x/L + phi_j).

    Amplitudes are uniform over ``amplitude_range``, integer wavenumbers
    uniform over ``wavenumbers``, phases uniform over [0, 2*pi).
    """

    mode_count: int = 5
    amplitude_range: tuple[float, float] = (-0.5, 0.5)
    wavenumbers: tuple[int, ...] = (1, 2, 3)
    seed: int = 0

    def __post_init__(self):
        if self.mode_count < 1:
            raise ConfigurationError(f"mode_count must be >= 1, got {self.mode_count}")
        lo, hi = self.amplitude_range
        if lo > hi:
            raise ConfigurationError(f"amplitude_range reversed: {self.amplitude_range}")
        if len(self.wavenumbers) == 0:
            raise ConfigurationError("wavenumber set must be nonempty")
        if any(l < 1 for l in self.wavenumbers):
            raise ConfigurationError(f"wavenumbers must be >= 1, got {self.wavenumbers}")


@dataclass(frozen=True)
class PDEConfig:
    """One equation setup: which PDE, its coefficient, and the time grid.

    ``coefficient`` is the transport speed c for advection and the
    diffusivity nu for heat; it is unused for ks. ``burn_in`` seconds are
    simulated and discarded before frame 0 (ks only), and ``solver_dt``
    bounds the internal ks step.
    """

    equation: str
    t_end: float
    n_t: int
    coefficient: float | None = None
    burn_in: float = 0.0
    solver_dt: float = 0.05

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ConfigurationError(f"unknown equation {self.equation!r}")
        if self.n_t < 2:
            raise ConfigurationError(f"n_t must be >= 2, got {self.n_t}")
        if not np.isfinite(self.t_end) or self.t_end <= 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if self.equation == ADVECTION:
            if self.coefficient is None or not np.isfinite(self.coefficient):
                raise ConfigurationError("advection requires a finite coefficient c")
        if self.equation == HEAT:
            if self.coefficient is None or not (self.coefficient > 0):
                raise ConfigurationError(f"heat requires coefficient nu > 0, got {self.coefficient}")
        if self.burn_in < 0:
            raise ConfigurationError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.equation == KS and self.solver_dt > self.frame_dt * (1 + 1e-12):
            raise ConfigurationError(
                f"ks solver_dt={self.solver_dt} exceeds frame spacing {self.frame_dt}"
            )

    @property
    def frame_dt(self) -> float:
        return self.t_end / (self.n_t - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_t)


@dataclass(frozen=True)
class Trajectory:
    """Discretized solution u[n_t, n_x] with its grid and provenance."""

    grid: SpatialGrid1D
    times: np.ndarray
    u: np.ndarray
    config: PDEConfig
    seed: int = 0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if u.shape != (times.size, self.grid.n_x):
            raise ConfigurationError(f"u shape {u.shape} does not match (n_t={times.size}, n_x={self.grid.n_x})")
        if not np.all(np.isfinite(u)):
            raise ConfigurationError("trajectory contains non-finite values")
        if times[0] != 0.0:
            raise ConfigurationError(f"times must start at 0, got {times[0]}")
        _check_uniform_times(times)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "u", u)

    @property
    def n_t(self) -> int:
        return self.times.size

    @property
    def frame_dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _check_uniform_times(times: np.ndarray) -> None:
    if times.size < 2 or not np.all(np.diff(times) > 0):
        raise ConfigurationError("times must be strictly increasing with at least 2 frames")
    dt = times[1] - times[0]
    span = max(abs(times[-1]), 1.0)
    if np.max(np.abs(times - (times[0] + dt * np.arange(times.size)))) > 1e-12 * span:
        raise ConfigurationError("times are not uniformly spaced")


def sample_initial_condition(spec: InitialConditionSpec, grid: SpatialGrid1D) -> np.ndarray:
    """Draw the sum-of-sines field for ``spec.seed``; bit-stable per seed."""
    rng = np.random.default_rng(spec.seed)
    return _draw_sum_of_sines(rng, spec, grid)


def _draw_sum_of_sines(rng: np.random.Generator, spec: InitialConditionSpec, grid: SpatialGrid1D) -> np.ndarray:
    lo, hi = spec.amplitude_range
    amps = rng.uniform(lo, hi, size=spec.mode_count)
    modes = rng.choice(np.asarray(spec.wavenumbers, dtype=int), size=spec.mode_count)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=spec.mode_count)
    x = grid.nodes
    u0 = np.zeros(grid.n_x)
    for a, l, p in zip(amps, modes, phases):
        u0 += a * np.sin(2.0 * np.pi * l * x / grid.length + p)
    return u0


def _advection_wavenumbers(grid: SpatialGrid1D) -> np.ndarray:
    # Odd-order spectral operators have no consistent sign at the Nyquist
    # bin; zeroing it there keeps solutions real and composition exact.
    k = grid.wavenumbers()
    if grid.n_x % 2 == 0:
        k = k.copy()
        k[-1] = 0.0
    return k


def solve_advection(
    u0: np.ndarray, c: float, times: np.ndarray, grid: SpatialGrid1D, seed: int = 0
) -> Trajectory:
    """Exact Fourier solution: mode k picks up the phase exp(-i*k*c*t)."""
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (grid.n_x,):
        raise ConfigurationError(f"u0 shape {u0.shape} does not match grid n_x={grid.n_x}")
    if not np.isfinite(c):
        raise ConfigurationError(f"advection speed must be finite, got {c}")
    times = np.asarray(times, dtype=float)
    k = _advection_wavenumbers(grid)
    u_hat0 = np.fft.rfft(u0)
    phases = np.exp(-1j * c * np.outer(times, k))
    u = np.fft.irfft(u_hat0[None, :] * phases, n=grid.n_x, axis=1)
    config = PDEConfig(ADVECTION, t_end=float(times[-1]), n_t=times.size, coefficient=float(c))
    return Trajectory(grid=grid, times=times, u=u, config=config, seed=seed)


def solve_heat(
    u0: np.ndarray, nu: float, times: np.ndarray, grid: SpatialGrid1D, seed: int = 0
) -> Trajectory:
    """Exact Fourier solution: mode k decays by exp(-nu*k^2*t)."""
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (grid.n_x,):
        raise ConfigurationError(f"u0 shape {u0.shape} does not match grid n_x={grid.n_x}")
    if not (nu > 0):
        raise ConfigurationError(f"diffusivity must be positive, got {nu}")
    times = np.asarray(times, dtype=float)
    k = grid.wavenumbers()
    u_hat0 = np.fft.rfft(u0)
    decay = np.exp(-nu * np.outer(times, k**2))
    u = np.fft.irfft(u_hat0[None, :] * decay, n=grid.n_x, axis=1)
    config = PDEConfig(HEAT, t_end=float(times[-1]), n_t=times.size, coefficient=float(nu))
    return Trajectory(grid=grid, times=times, u=u, config=config, seed=seed)


def _etdrk4_coefficients(lin: np.ndarray, dt: float) -> tuple[np.ndarray, ...]:
    """Kassam-Trefethen contour-integral evaluation of the ETDRK4 weights."""
    n = ETDRK4_CONTOUR_POINTS
    roots = np.exp(1j * np.pi * (np.arange(n) + 0.5) / n)
    lr = dt * lin[:, None] + roots[None, :]
    exp_lr = np.exp(lr)
    q = dt * ((np.exp(lr / 2.0) - 1.0) / lr).mean(axis=1).real
    f1 = dt * ((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr**2)) / lr**3).mean(axis=1).real
    f2 = dt * ((2.0 + lr + exp_lr * (-2.0 + lr)) / lr**3).mean(axis=1).real
    f3 = dt * ((-4.0 - 3.0 * lr - lr**2 + exp_lr * (4.0 - lr)) / lr**3).mean(axis=1).real
    return np.exp(dt * lin), np.exp(0.5 * dt * lin), q, f1, f2, f3


class _KsStepper:
    """ETDRK4 stepper for the KS equation in rfft space."""

    def __init__(self, grid: SpatialGrid1D, dt: float):
        self.n_x = grid.n_x
        k = grid.wavenumbers()
        self.lin = k**2 - k**4
        self.ik = 1j * _advection_wavenumbers(grid)
        # 2/3-rule dealiasing of the quadratic product.
        bins = np.arange(grid.n_x // 2 + 1)
        self.mask = bins <= grid.n_x // 3
        (self.e_full, self.e_half, self.q, self.f1, self.f2, self.f3) = _etdrk4_coefficients(self.lin, dt)

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        u = np.fft.irfft(v, n=self.n_x)
        return -0.5 * self.ik * (np.fft.rfft(u * u) * self.mask)

    def step(self, v: np.ndarray) -> np.ndarray:
        nv = self.nonlinear(v)
        a = self.e_half * v + self.q * nv
        na = self.nonlinear(a)
        b = self.e_half * v + self.q * na
        nb = self.nonlinear(b)
        c = self.e_half * a + self.q * (2.0 * nb - nv)
        nc = self.nonlinear(c)
        return self.e_full * v + nv * self.f1 + 2.0 * (na + nb) * self.f2 + nc * self.f3


def _check_blowup(u: np.ndarray, step: int, time: float) -> None:
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_LIMIT:
        raise SolverDivergenceError(
            f"ks solver diverged at internal step {step} (t={time:.6g})", step=step, time=time
        )


def solve_ks(u0: np.ndarray, config: PDEConfig, grid: SpatialGrid1D, seed: int = 0) -> Trajectory:
    """Integrate KS with ETDRK4, discard the burn-in, sample n_t frames.

    The internal step is config.solver_dt, shrunk where needed so that an
    integer number of steps lands exactly on each saved frame.
    """
    if config.equation != KS:
        raise ConfigurationError(f"solve_ks called with equation {config.equation!r}")
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (grid.n_x,):
        raise ConfigurationError(f"u0 shape {u0.shape} does not match grid n_x={grid.n_x}")

    frame_dt = config.frame_dt
    steps_per_frame = max(1, int(np.ceil(frame_dt / config.solver_dt - 1e-12)))
    dt_eff = frame_dt / steps_per_frame

    v = np.fft.rfft(u0)
    step_index = 0

    if config.burn_in > 0:
        n_burn = max(1, int(np.ceil(config.burn_in / config.solver_dt - 1e-12)))
        dt_burn = config.burn_in / n_burn
        burn = _KsStepper(grid, dt_burn)
        for _ in range(n_burn):
            v = burn.step(v)
            step_index += 1
            _check_blowup(np.fft.irfft(v, n=grid.n_x), step_index, step_index * dt_burn)

    stepper = _KsStepper(grid, dt_eff)
    frames = np.empty((config.n_t, grid.n_x))
    frames[0] = np.fft.irfft(v, n=grid.n_x)
    for frame in range(1, config.n_t):
        for _ in range(steps_per_frame):
            v = stepper.step(v)
            step_index += 1
        u = np.fft.irfft(v, n=grid.n_x)
        _check_blowup(u, step_index, config.burn_in + (frame) * frame_dt)
        frames[frame] = u

    times = np.linspace(0.0, config.t_end, config.n_t)
    return Trajectory(grid=grid, times=times, u=frames, config=config, seed=seed)


def solve(
    equation: str,
    u0: np.ndarray,
    coefficient: float | None,
    times: np.ndarray,
    grid: SpatialGrid1D,
    solver_dt: float = 0.05,
    seed: int = 0,
) -> Trajectory:
    """Dispatch to the per-equation solver with frames at ``times``."""
    times = np.asarray(times, dtype=float)
    if equation == ADVECTION:
        return solve_advection(u0, coefficient, times, grid, seed=seed)
    if equation == HEAT:
        return solve_heat(u0, coefficient, times, grid, seed=seed)
    if equation == KS:
        config = PDEConfig(KS, t_end=float(times[-1]), n_t=times.size, solver_dt=min(solver_dt, float(times[1] - times[0])))
        return solve_ks(u0, config, grid, seed=seed)
    raise ConfigurationError(f"unknown equation {equation!r}")


@dataclass
class Dataset:
    """In-memory collection of same-shape trajectories (plus optional labels).

    This is the currency passed between generation, labelling, training and
    evaluation; ``pdestep.io`` (de)serializes it.
    """

    equation: str
    grid: SpatialGrid1D
    times: np.ndarray
    coefficients: np.ndarray
    seeds: np.ndarray
    u: np.ndarray
    labels: np.ndarray | None = None
    label_scheme: str | None = None
    burn_in: float = 0.0
    solver_dt: float = 0.05

    @property
    def n_samples(self) -> int:
        return self.u.shape[0]

    @property
    def n_t(self) -> int:
        return self.u.shape[1]

    @property
    def n_x(self) -> int:
        return self.u.shape[2]

    @property
    def frame_dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def config_for(self, i: int) -> PDEConfig:
        coeff = None if self.equation == KS else float(self.coefficients[i])
        return PDEConfig(
            self.equation,
            t_end=self.t_end,
            n_t=self.n_t,
            coefficient=coeff,
            burn_in=self.burn_in,
            solver_dt=self.solver_dt,
        )

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(
            grid=self.grid,
            times=self.times,
            u=self.u[i],
            config=self.config_for(i),
            seed=int(self.seeds[i]),
        )

    def split(self, n_val: int) -> tuple["Dataset", "Dataset"]:
        """Split off the last ``n_val`` whole trajectories for validation."""
        if not 0 < n_val < self.n_samples:
            raise ConfigurationError(f"n_val must be in (0, {self.n_samples}), got {n_val}")
        n_train = self.n_samples - n_val
        return self._take(slice(0, n_train)), self._take(slice(n_train, None))

    def _take(self, sl: slice) -> "Dataset":
        return replace(
            self,
            coefficients=self.coefficients[sl],
            seeds=self.seeds[sl],
            u=self.u[sl],
            labels=None if self.labels is None else self.labels[sl],
        )


def generate_trajectory(
    config: PDEConfig, spec: InitialConditionSpec, grid: SpatialGrid1D, seed: int
) -> Trajectory:
    """One sample: coefficient (where applicable) then IC, both from ``seed``."""
    rng = np.random.default_rng(seed)
    if config.equation in COEFF_RANGES:
        lo, hi = COEFF_RANGES[config.equation]
        config = replace(config, coefficient=float(rng.uniform(lo, hi)))
    u0 = _draw_sum_of_sines(rng, spec, grid)
    if config.equation == ADVECTION:
        return solve_advection(u0, config.coefficient, config.times, grid, seed=seed)
    if config.equation == HEAT:
        return solve_heat(u0, config.coefficient, config.times, grid, seed=seed)
    return solve_ks(u0, config, grid, seed=seed)


def generate_dataset(
    config: PDEConfig,
    spec: InitialConditionSpec,
    grid: SpatialGrid1D,
    n_samples: int,
    base_seed: int,
) -> Dataset:
    """n_samples independent trajectories with per-sample seeds base_seed+i."""
    if n_samples < 1:
        raise ConfigurationError(f"n_samples must be >= 1, got {n_samples}")
    u = np.empty((n_samples, config.n_t, grid.n_x))
    coeffs = np.zeros(n_samples)
    seeds = np.empty(n_samples, dtype=np.uint64)
    times = None
    for i in range(n_samples):
        traj = generate_trajectory(config, spec, grid, seed=base_seed + i)
        u[i] = traj.u
        coeffs[i] = 0.0 if traj.config.coefficient is None else traj.config.coefficient
        seeds[i] = base_seed + i
        times = traj.times
    return Dataset(
        equation=config.equation,
        grid=grid,
        times=times,
        coefficients=coeffs,
        seeds=seeds,
        u=u,
        burn_in=config.burn_in,
        solver_dt=config.solver_dt,
    )
