"""Conditioned surrogate networks with hand-written reverse-mode gradients."""

from .adam import AdamState, adam_update
from .layers import adaln_modulate, gelu, sinusoidal_embed, spectral_conv_1d
from .network import (
    ARCH_CONV,
    ARCH_SPECTRAL,
    ARCHITECTURES,
    Conditioning,
    GradTape,
    IDENTITY_NORM,
    ModelParams,
    NormStats,
    backward,
    embed_conditioning,
    forward,
    init_params,
    make_conditioning,
    predict,
)

__all__ = [
    "ARCH_CONV",
    "ARCH_SPECTRAL",
    "ARCHITECTURES",
    "AdamState",
    "Conditioning",
    "GradTape",
    "IDENTITY_NORM",
    "ModelParams",
    "NormStats",
    "adaln_modulate",
    "adam_update",
    "backward",
    "embed_conditioning",
    "forward",
    "gelu",
    "init_params",
    "make_conditioning",
    "predict",
    "sinusoidal_embed",
    "spectral_conv_1d",
]
