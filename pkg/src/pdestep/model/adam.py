"""Adam parameter updates with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, TrainingDivergenceError, UsageError
from .network import ModelParams


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        return cls(m={k: np.zeros_like(t) for k, t in params.tensors.items()},
                   v={k: np.zeros_like(t) for k, t in params.tensors.items()})


def adam_update(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    step: int,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam step; returns fresh params and moments."""
    if step < 1:
        raise ConfigurationError(f"step must be >= 1, got {step}")
    if set(grads) != set(params.tensors):
        raise UsageError("gradient names do not match parameter names")
    new_t, new_m, new_v = {}, {}, {}
    for name, theta in params.tensors.items():
        g = grads[name]
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(f"non-finite gradient for {name}")
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        new_t[name] = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    new_params = ModelParams(params.arch, params.width, params.depth, params.modes, new_t)
    return new_params, AdamState(m=new_m, v=new_v)
