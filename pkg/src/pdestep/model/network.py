"""The surrogate network: two small conditioned architectures.

``spectral``: lift -> depth x (truncated Fourier mixing + 1x1 bypass,
GELU, scale/shift conditioning) -> project.

``conv``: lift -> depth x residual (width-3 periodic conv, GELU,
scale/shift conditioning) -> project.

Forward passes record the activations needed for an exact hand-written
reverse sweep; no autodiff framework is involved.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, InputError, ShapeError, UsageError
from . import layers

logger = logging.getLogger(__name__)

ARCH_SPECTRAL = "spectral"
ARCH_CONV = "conv"
ARCHITECTURES = (ARCH_SPECTRAL, ARCH_CONV)


@dataclass
class ModelParams:
    """Named flat collection of real parameter tensors.

    Spectral mixing weights are complex numbers stored as trailing real
    pairs. ``modes`` is ignored by the conv architecture.
    """

    arch: str
    width: int
    depth: int
    modes: int
    tensors: dict[str, np.ndarray]

    def n_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def copy(self) -> "ModelParams":
        return ModelParams(self.arch, self.width, self.depth, self.modes,
                           {k: v.copy() for k, v in self.tensors.items()})

    def names(self) -> tuple[str, ...]:
        return tuple(self.tensors)


@dataclass(frozen=True)
class Conditioning:
    """Scaled time and (optionally) a scaled equation coefficient in [0, 1].

    Scalars condition a single field; arrays condition a batch. ``clamped``
    records whether any raw value fell outside the training range.
    """

    time_scaled: float | np.ndarray
    coeff_scaled: float | np.ndarray | None = None
    clamped: bool = False


def make_conditioning(t, t_max: float, coefficient=None, coeff_range=None) -> Conditioning:
    """Scale absolute time and coefficient into [0, 1], clamping out-of-range values."""
    t = np.asarray(t, dtype=float)
    t_scaled = t / t_max if t_max > 0 else t
    clamped = bool(np.any(t_scaled < 0) or np.any(t_scaled > 1))
    t_scaled = np.clip(t_scaled, 0.0, 1.0)
    c_scaled = None
    if coefficient is not None and coeff_range is not None:
        lo, hi = coeff_range
        c = np.asarray(coefficient, dtype=float)
        c_scaled = (c - lo) / (hi - lo) if hi > lo else np.zeros_like(c)
        clamped = clamped or bool(np.any(c_scaled < 0) or np.any(c_scaled > 1))
        c_scaled = np.clip(c_scaled, 0.0, 1.0)
    elif coefficient is not None:
        c_scaled = np.clip(np.asarray(coefficient, dtype=float), 0.0, 1.0)
    if clamped:
        logger.debug("conditioning values outside [0, 1] were clamped")
    return Conditioning(time_scaled=t_scaled, coeff_scaled=c_scaled, clamped=clamped)


def embed_conditioning(cond: Conditioning, dim: int, batch: int) -> np.ndarray:
    """Summed sinusoidal embeddings of the conditioning scalars, [B, dim]."""
    t = np.broadcast_to(np.asarray(cond.time_scaled, dtype=float), (batch,))
    e = layers.sinusoidal_embed(t, dim)
    if cond.coeff_scaled is not None:
        c = np.broadcast_to(np.asarray(cond.coeff_scaled, dtype=float), (batch,))
        e = e + layers.sinusoidal_embed(c, dim)
    return e


@dataclass(frozen=True)
class NormStats:
    """Standardization statistics recorded in checkpoints.

    ``kind`` is "none" or "standardize"; the identity stats (0, 1, 0, 1)
    make the two behave uniformly.
    """

    kind: str = "none"
    mean_u: float = 0.0
    std_u: float = 1.0
    mean_y: float = 0.0
    std_y: float = 1.0

    def norm_input(self, u):
        return (u - self.mean_u) / self.std_u

    def norm_target(self, y):
        return (y - self.mean_y) / self.std_y

    def denorm_output(self, y):
        return y * self.std_y + self.mean_y


IDENTITY_NORM = NormStats()


def init_params(
    arch: str,
    width: int = 32,
    depth: int = 4,
    modes: int = 16,
    seed: int = 0,
    zero_projection: bool = False,
) -> ModelParams:
    """Seeded initialisation.

    Pointwise/conv weights are uniform in +-(1/fan_in)^0.5, spectral pairs
    uniform scaled by 1/(width*modes), biases zero. ``zero_projection``
    zeroes the final projection (used by tests that need the zero map).
    """
    if arch not in ARCHITECTURES:
        raise ConfigurationError(f"unknown architecture {arch!r}")
    if width % 2 != 0:
        raise ConfigurationError(f"width must be even for the sinusoidal embeddings, got {width}")
    rng = np.random.default_rng(seed)
    t: dict[str, np.ndarray] = {}

    def uniform(shape, fan_in):
        s = (1.0 / fan_in) ** 0.5
        return rng.uniform(-s, s, size=shape)

    t["lift.w"] = uniform((width, 1), 1)
    t["lift.b"] = np.zeros(width)
    for i in range(depth):
        p = f"block{i}"
        if arch == ARCH_SPECTRAL:
            s = 1.0 / (width * modes)
            t[f"{p}.spec.w"] = rng.uniform(-s, s, size=(width, width, modes, 2))
            t[f"{p}.pw.w"] = uniform((width, width), width)
            t[f"{p}.pw.b"] = np.zeros(width)
        else:
            t[f"{p}.conv.w"] = uniform((width, width, 3), 3 * width)
            t[f"{p}.conv.b"] = np.zeros(width)
        t[f"{p}.adaln.w1"] = uniform((width, width), width)
        t[f"{p}.adaln.b1"] = np.zeros(width)
        t[f"{p}.adaln.w2"] = uniform((2 * width, width), width)
        t[f"{p}.adaln.b2"] = np.zeros(2 * width)
    t["proj.w"] = np.zeros((1, width)) if zero_projection else uniform((1, width), width)
    t["proj.b"] = np.zeros(1)
    return ModelParams(arch=arch, width=width, depth=depth, modes=modes, tensors=t)


@dataclass
class GradTape:
    """Activations saved by one forward pass, replayed by :func:`backward`."""

    params: ModelParams
    e: np.ndarray
    entries: list = field(default_factory=list)
    output_shape: tuple = ()


def _psi_block(params: ModelParams, i: int):
    t = params.tensors
    return (t[f"block{i}.adaln.w1"], t[f"block{i}.adaln.b1"],
            t[f"block{i}.adaln.w2"], t[f"block{i}.adaln.b2"])


def forward(
    params: ModelParams,
    u: np.ndarray,
    cond: Conditioning,
    with_tape: bool = True,
    identity_activation: bool = False,
):
    """Evaluate the surrogate on a field [n_x] or a batch [B, n_x].

    Returns (output, tape); the tape is None when ``with_tape`` is False.
    ``identity_activation`` disables the GELU nonlinearity (test hook for
    band-limitation checks).
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    if single:
        u = u[None]
    if u.ndim != 2:
        raise ShapeError(f"expected field [n_x] or [B, n_x], got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InputError("non-finite values in model input")

    t = params.tensors
    act = (lambda x: x) if identity_activation else layers.gelu
    e = embed_conditioning(cond, params.width, u.shape[0])
    tape = GradTape(params=params, e=e) if with_tape else None

    h = layers.pointwise_forward(u[:, None, :], t["lift.w"], t["lift.b"])
    if with_tape:
        tape.entries.append(("lift", u[:, None, :]))

    for i in range(params.depth):
        p = f"block{i}"
        if params.arch == ARCH_SPECTRAL:
            s, h_modes = layers.spectral_forward(h, t[f"{p}.spec.w"], params.modes)
            z = s + layers.pointwise_forward(h, t[f"{p}.pw.w"], t[f"{p}.pw.b"])
            a = act(z)
            out, saved = layers.adaln_forward(a, e, *_psi_block(params, i))
            if with_tape:
                tape.entries.append(("spec_block", (i, h, h_modes, z, saved)))
            h = out
        else:
            c = layers.conv3_forward(h, t[f"{p}.conv.w"], t[f"{p}.conv.b"])
            a = act(c)
            m, saved = layers.adaln_forward(a, e, *_psi_block(params, i))
            if with_tape:
                tape.entries.append(("conv_block", (i, h, c, saved)))
            h = h + m

    out = layers.pointwise_forward(h, t["proj.w"], t["proj.b"])[:, 0, :]
    if with_tape:
        tape.entries.append(("proj", h))
        tape.entries.append(("identity_activation", identity_activation))
        tape.output_shape = out.shape
    return (out[0] if single else out), tape


def predict(params: ModelParams, u: np.ndarray, cond: Conditioning) -> np.ndarray:
    """Tape-free forward pass."""
    out, _ = forward(params, u, cond, with_tape=False)
    return out


def backward(tape: GradTape, grad_output: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of <grad_output, output> with respect to every parameter."""
    if tape is None or not tape.entries:
        raise UsageError("backward called without a recorded forward pass")
    params = tape.params
    t = params.tensors
    g = np.asarray(grad_output, dtype=float)
    if g.ndim == 1:
        g = g[None]
    if g.shape != tape.output_shape:
        raise UsageError(f"grad_output shape {g.shape} does not match recorded output {tape.output_shape}")

    grads = {name: np.zeros_like(arr) for name, arr in t.items()}
    entries = list(tape.entries)
    identity_activation = entries.pop()[1]
    act_grad = (lambda x: np.ones_like(x)) if identity_activation else layers.gelu_grad

    kind, h_last = entries.pop()
    assert kind == "proj"
    gh, gw, gb = layers.pointwise_vjp(g[:, None, :], h_last, t["proj.w"])
    grads["proj.w"] += gw
    grads["proj.b"] += gb
    g = gh

    while len(entries) > 1:
        kind, payload = entries.pop()
        if kind == "spec_block":
            i, h_in, h_modes, z, saved = payload
            p = f"block{i}"
            ga, gw1, gb1, gw2, gb2 = layers.adaln_vjp(g, saved, t[f"{p}.adaln.w1"], t[f"{p}.adaln.w2"])
            grads[f"{p}.adaln.w1"] += gw1
            grads[f"{p}.adaln.b1"] += gb1
            grads[f"{p}.adaln.w2"] += gw2
            grads[f"{p}.adaln.b2"] += gb2
            gz = ga * act_grad(z)
            gh_spec, gw_spec = layers.spectral_vjp(gz, h_modes, t[f"{p}.spec.w"], h_in.shape[-1])
            gh_pw, gw_pw, gb_pw = layers.pointwise_vjp(gz, h_in, t[f"{p}.pw.w"])
            grads[f"{p}.spec.w"] += gw_spec
            grads[f"{p}.pw.w"] += gw_pw
            grads[f"{p}.pw.b"] += gb_pw
            g = gh_spec + gh_pw
        else:
            i, h_in, c, saved = payload
            p = f"block{i}"
            ga, gw1, gb1, gw2, gb2 = layers.adaln_vjp(g, saved, t[f"{p}.adaln.w1"], t[f"{p}.adaln.w2"])
            grads[f"{p}.adaln.w1"] += gw1
            grads[f"{p}.adaln.b1"] += gb1
            grads[f"{p}.adaln.w2"] += gw2
            grads[f"{p}.adaln.b2"] += gb2
            gc = ga * act_grad(c)
            gh_conv, gk, gb = layers.conv3_vjp(gc, h_in, t[f"{p}.conv.w"])
            grads[f"{p}.conv.w"] += gk
            grads[f"{p}.conv.b"] += gb
            g = g + gh_conv

    kind, u_lift = entries.pop()
    assert kind == "lift"
    _, gw, gb = layers.pointwise_vjp(g, u_lift, t["lift.w"])
    grads["lift.w"] += gw
    grads["lift.b"] += gb
    return grads
