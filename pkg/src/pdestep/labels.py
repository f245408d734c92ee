"""Temporal-derivative training labels from stored trajectories.

Finite-difference schemes of selectable order; higher-order schemes use
one-sided 5-point stencils so that endpoint frames keep the interior
accuracy. All schemes are linear in the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DegenerateDataError, ShapeError
from .pde_data import Dataset, Trajectory

FORWARD1 = "forward1"
CENTRAL2 = "central2"
CENTRAL4 = "central4"
RICHARDSON4 = "richardson4"
SCHEMES = (FORWARD1, CENTRAL2, CENTRAL4, RICHARDSON4)
DEFAULT_SCHEME = RICHARDSON4

MIN_FRAMES = {FORWARD1: 2, CENTRAL2: 3, CENTRAL4: 5, RICHARDSON4: 5}


@dataclass(frozen=True)
class DerivativeField:
    """Per-frame du/dt estimates aligned with a trajectory's frames."""

    dudt: np.ndarray
    scheme: str
    source_dt: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.dudt)):
            raise ConfigurationError("derivative labels contain non-finite values")


def _validate_scheme(scheme: str, n_t: int) -> None:
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown label scheme {scheme!r}")
    if n_t < MIN_FRAMES[scheme]:
        raise ConfigurationError(f"scheme {scheme} needs >= {MIN_FRAMES[scheme]} frames, got {n_t}")


def differentiate_frames(u: np.ndarray, dt: float, scheme: str, time_axis: int = 0) -> np.ndarray:
    """Apply the scheme's stencils along ``time_axis``; shape is preserved."""
    u = np.asarray(u, dtype=float)
    n_t = u.shape[time_axis]
    _validate_scheme(scheme, n_t)
    w = np.moveaxis(u, time_axis, 0)
    d = np.empty_like(w)

    if scheme == FORWARD1:
        d[:-1] = (w[1:] - w[:-1]) / dt
        # Last frame has no forward neighbour; duplicate the last interior value.
        d[-1] = d[-2]
    elif scheme == CENTRAL2:
        d[1:-1] = (w[2:] - w[:-2]) / (2.0 * dt)
        d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dt)
        d[-1] = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * dt)
    elif scheme == CENTRAL4:
        d[2:-2] = (-w[4:] + 8.0 * w[3:-1] - 8.0 * w[1:-3] + w[:-4]) / (12.0 * dt)
        # Second-order fallback at the four frames without a full central stencil.
        d[1] = (w[2] - w[0]) / (2.0 * dt)
        d[-2] = (w[-1] - w[-3]) / (2.0 * dt)
        d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dt)
        d[-1] = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * dt)
    else:  # RICHARDSON4
        d[2:-2] = (-w[4:] + 8.0 * w[3:-1] - 8.0 * w[1:-3] + w[:-4]) / (12.0 * dt)
        # 4th-order one-sided 5-point stencils at the two frames nearest
        # each boundary (mirrored with flipped signs on the right).
        d[0] = (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]) / (12.0 * dt)
        d[1] = (-3.0 * w[0] - 10.0 * w[1] + 18.0 * w[2] - 6.0 * w[3] + w[4]) / (12.0 * dt)
        d[-1] = (25.0 * w[-1] - 48.0 * w[-2] + 36.0 * w[-3] - 16.0 * w[-4] + 3.0 * w[-5]) / (12.0 * dt)
        d[-2] = (3.0 * w[-1] + 10.0 * w[-2] - 18.0 * w[-3] + 6.0 * w[-4] - w[-5]) / (12.0 * dt)

    return np.moveaxis(d, 0, time_axis)


def compute_derivative_labels(traj: Trajectory, scheme: str = DEFAULT_SCHEME) -> DerivativeField:
    """du/dt labels at every frame of ``traj`` (uniform spacing required)."""
    dt = traj.frame_dt
    dudt = differentiate_frames(traj.u, dt, scheme, time_axis=0)
    return DerivativeField(dudt=dudt, scheme=scheme, source_dt=dt)


def attach_labels(dataset: Dataset, scheme: str = DEFAULT_SCHEME) -> Dataset:
    """Return a copy of ``dataset`` with labels for every sample."""
    dudt = differentiate_frames(dataset.u, dataset.frame_dt, scheme, time_axis=1)
    return replace(dataset, labels=dudt, label_scheme=scheme)


def label_error_report(labels: DerivativeField, reference: DerivativeField) -> float:
    """Relative L2 error of ``labels`` against ``reference`` over all frames."""
    a = np.asarray(labels.dudt, dtype=float)
    b = np.asarray(reference.dudt, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"label shapes differ: {a.shape} vs {b.shape}")
    denom = np.linalg.norm(b)
    if denom == 0.0:
        raise DegenerateDataError("reference labels are identically zero")
    return float(np.linalg.norm(a - b) / denom)


def stencil_noise_gain(scheme: str, n_t: int) -> float:
    """RMS noise gain of the scheme over all frames.

    For i.i.d. noise of standard deviation sigma added to the frames, the
    label perturbation RMS is sigma * gain / dt.
    """
    weights = differentiate_frames(np.eye(n_t), dt=1.0, scheme=scheme, time_axis=0)
    return float(np.sqrt(np.mean(np.sum(weights**2, axis=1))))
