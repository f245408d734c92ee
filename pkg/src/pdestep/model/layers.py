"""Differentiable building blocks with hand-derived vector-Jacobian products.

All forward functions operate on batched channel-major fields [B, C, X];
each has a matching ``*_vjp`` that maps the gradient of a scalar objective
with respect to the output back onto the inputs and parameters.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..errors import ConfigurationError, ShapeError

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


def sinusoidal_embed(x, dim: int) -> np.ndarray:
    """Sinusoidal features of a scalar: component i is sin(x / 10000^(i/dim))
    for odd i and cos(x / 10000^(i/dim)) for even i, i = 1..dim.

    ``x`` may be a scalar (returns [dim]) or a batch of scalars (returns
    [..., dim]); every component lies in [-1, 1].
    """
    if dim < 2 or dim % 2 != 0:
        raise ConfigurationError(f"embedding dimension must be even and >= 2, got {dim}")
    x = np.asarray(x, dtype=float)
    i = np.arange(1, dim + 1)
    angles = x[..., None] / (10000.0 ** (i / dim))
    return np.where(i % 2 == 1, np.sin(angles), np.cos(angles))


def pointwise_forward(h: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """1x1 channel mixing: out[b,o,x] = sum_i w[o,i] h[b,i,x] + b[o]."""
    return np.einsum("oi,bix->box", w, h) + b[None, :, None]


def pointwise_vjp(g: np.ndarray, h: np.ndarray, w: np.ndarray):
    grad_w = np.einsum("box,bix->oi", g, h)
    grad_b = g.sum(axis=(0, 2))
    grad_h = np.einsum("oi,box->bix", w, g)
    return grad_h, grad_w, grad_b


def conv3_forward(h: np.ndarray, kernel: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Width-3 periodic convolution; kernel [C_out, C_in, 3] taps (-1, 0, +1)."""
    out = np.einsum("oi,bix->box", kernel[:, :, 1], h)
    out += np.einsum("oi,bix->box", kernel[:, :, 0], np.roll(h, 1, axis=-1))
    out += np.einsum("oi,bix->box", kernel[:, :, 2], np.roll(h, -1, axis=-1))
    return out + b[None, :, None]


def conv3_vjp(g: np.ndarray, h: np.ndarray, kernel: np.ndarray):
    grad_k = np.empty_like(kernel)
    grad_k[:, :, 1] = np.einsum("box,bix->oi", g, h)
    grad_k[:, :, 0] = np.einsum("box,bix->oi", g, np.roll(h, 1, axis=-1))
    grad_k[:, :, 2] = np.einsum("box,bix->oi", g, np.roll(h, -1, axis=-1))
    grad_b = g.sum(axis=(0, 2))
    grad_h = np.einsum("oi,box->bix", kernel[:, :, 1], g)
    grad_h += np.roll(np.einsum("oi,box->bix", kernel[:, :, 0], g), -1, axis=-1)
    grad_h += np.roll(np.einsum("oi,box->bix", kernel[:, :, 2], g), 1, axis=-1)
    return grad_h, grad_k, grad_b


def _as_complex(w_pair: np.ndarray) -> np.ndarray:
    return w_pair[..., 0] + 1j * w_pair[..., 1]


def spectral_forward(h: np.ndarray, w_pair: np.ndarray, modes: int):
    """Truncated Fourier channel mixing.

    FFT along x, multiply the lowest ``modes`` coefficients by the complex
    weights w[i, o, m] (stored as real pairs [..., 2]), zero the rest,
    inverse FFT. The Nyquist bin is never retained (modes <= n_x/2).

    Returns the real output and the truncated input spectrum needed by the
    backward pass.
    """
    n_x = h.shape[-1]
    if modes > n_x // 2:
        raise ConfigurationError(f"modes={modes} exceeds n_x/2={n_x // 2}")
    spectrum = np.fft.rfft(h, axis=-1)
    h_modes = spectrum[:, :, :modes]
    w = _as_complex(w_pair)
    out_modes = np.einsum("bim,iom->bom", h_modes, w)
    out_spec = np.zeros((h.shape[0], w.shape[1], n_x // 2 + 1), dtype=complex)
    out_spec[:, :, :modes] = out_modes
    out = np.fft.irfft(out_spec, n=n_x, axis=-1)
    return out, h_modes


def spectral_vjp(g: np.ndarray, h_modes: np.ndarray, w_pair: np.ndarray, n_x: int):
    """VJP of :func:`spectral_forward`.

    The adjoint of irfft scales interior bins by 2/n_x and the DC/Nyquist
    bins by 1/n_x; the adjoint of rfft is n_x * irfft with interior bins
    halved. Both follow from writing the real transforms as R-linear maps.
    """
    modes = w_pair.shape[2]
    n_bins = n_x // 2 + 1
    g_spec = np.fft.rfft(g, axis=-1)
    scale = np.full(n_bins, 2.0 / n_x)
    scale[0] = 1.0 / n_x
    if n_x % 2 == 0:
        scale[-1] = 1.0 / n_x
    g_out_modes = (g_spec * scale)[:, :, :modes]

    w = _as_complex(w_pair)
    grad_w = np.einsum("bom,bim->iom", g_out_modes, np.conj(h_modes))
    grad_w_pair = np.stack([grad_w.real, grad_w.imag], axis=-1)

    g_h_modes = np.einsum("bom,iom->bim", g_out_modes, np.conj(w))
    z = np.zeros((g.shape[0], h_modes.shape[1], n_bins), dtype=complex)
    z[:, :, :modes] = g_h_modes
    z[:, :, 1:modes] *= 0.5
    grad_h = n_x * np.fft.irfft(z, n=n_x, axis=-1)
    return grad_h, grad_w_pair


def spectral_conv_1d(v: np.ndarray, w_pair: np.ndarray) -> np.ndarray:
    """Standalone truncated spectral convolution of a field [C, X] or [B, C, X]."""
    v = np.asarray(v, dtype=float)
    single = v.ndim == 2
    if single:
        v = v[None]
    if v.ndim != 3:
        raise ShapeError(f"expected [C, X] or [B, C, X], got shape {v.shape}")
    if w_pair.shape[0] != v.shape[1]:
        raise ShapeError(f"weight input channels {w_pair.shape[0]} != field channels {v.shape[1]}")
    out, _ = spectral_forward(v, w_pair, w_pair.shape[2])
    return out[0] if single else out


def psi_forward(e: np.ndarray, w1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: np.ndarray):
    """Conditioning MLP d -> d -> 2d with a GELU hidden layer."""
    pre = e @ w1.T + b1
    z = gelu(pre)
    ab = z @ w2.T + b2
    return ab, pre, z


def adaln_forward(h: np.ndarray, e: np.ndarray, w1, b1, w2, b2):
    """Scale/shift modulation: [alpha, beta] = psi(e); out = alpha * h + beta.

    ``h`` is [B, C, X] with C equal to the embedding dimension; alpha and
    beta are per-channel and broadcast over x.
    """
    d = h.shape[1]
    if e.shape[-1] != d:
        raise ShapeError(f"embedding dim {e.shape[-1]} != channel dim {d}")
    ab, pre, z = psi_forward(e, w1, b1, w2, b2)
    alpha, beta = ab[:, :d], ab[:, d:]
    out = alpha[:, :, None] * h + beta[:, :, None]
    saved = (h, e, pre, z, alpha)
    return out, saved


def adaln_vjp(g: np.ndarray, saved, w1: np.ndarray, w2: np.ndarray):
    h, e, pre, z, alpha = saved
    g_alpha = (g * h).sum(axis=-1)
    g_beta = g.sum(axis=-1)
    grad_h = alpha[:, :, None] * g

    g_ab = np.concatenate([g_alpha, g_beta], axis=1)
    grad_w2 = np.einsum("bo,bi->oi", g_ab, z)
    grad_b2 = g_ab.sum(axis=0)
    g_z = g_ab @ w2
    g_pre = g_z * gelu_grad(pre)
    grad_w1 = np.einsum("bo,bi->oi", g_pre, e)
    grad_b1 = g_pre.sum(axis=0)
    return grad_h, grad_w1, grad_b1, grad_w2, grad_b2


def adaln_modulate(h: np.ndarray, e: np.ndarray, psi_params) -> np.ndarray:
    """Forward-only modulation; ``psi_params`` is the (w1, b1, w2, b2) block."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(e, dtype=float)
    single = h.ndim == 2
    if single:
        h = h[None]
        e = e[None]
    out, _ = adaln_forward(h, e, *psi_params)
    return out[0] if single else out
