"""Inverted-attention encoder: each variate's whole series is one token."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigurationError, DimensionError
from .nn import Linear, Module, param
from .tensor import Tensor


def default_heads(d_model: int, cap: int = 8) -> int:
    """Largest divisor of ``d_model`` that does not exceed ``cap``."""
    return max(h for h in range(1, min(cap, d_model) + 1) if d_model % h == 0)


@dataclass(frozen=True)
class EncoderConfig:
    d_model: int
    d_ff: int
    e_layers: int = 1
    n_heads: int | None = None
    dropout: float = 0.0

    def __post_init__(self):
        if self.n_heads is None:
            object.__setattr__(self, "n_heads", default_heads(self.d_model))
        if self.d_model < 1 or self.d_ff < 1:
            raise ConfigurationError("d_model and d_ff must be positive")
        if self.d_model % self.n_heads:
            raise ConfigurationError(
                f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}")
        if self.e_layers < 1:
            raise ConfigurationError(f"e_layers must be >= 1, got {self.e_layers}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must lie in [0, 1), got {self.dropout}")


class LayerNorm(Module):
    def __init__(self, width: int, eps: float = 1e-5):
        self.gamma = param(np.ones(width))
        self.beta = param(np.zeros(width))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gamma, self.beta, self.eps)


class MultiHeadSelfAttention(Module):
    def __init__(self, d_model: int, n_heads: int, dropout: float, rng):
        self.q = Linear(d_model, d_model, rng)
        self.k = Linear(d_model, d_model, rng)
        self.v = Linear(d_model, d_model, rng)
        self.out = Linear(d_model, d_model, rng)
        self.n_heads = n_heads
        self.dropout = dropout
        self._rng = rng
        self.last_attention: np.ndarray | None = None

    def _split(self, x: Tensor) -> Tensor:
        # [..., C, d_model] -> [..., heads, C, d_head]
        *lead, C, D = x.shape
        x = x.reshape(*lead, C, self.n_heads, D // self.n_heads)
        return x.swapaxes(-2, -3)

    def __call__(self, x: Tensor) -> Tensor:
        *lead, C, D = x.shape
        q, k, v = self._split(self.q(x)), self._split(self.k(x)), self._split(self.v(x))
        scale = 1.0 / np.sqrt(D // self.n_heads)
        scores = T.matmul(q, k.swapaxes(-1, -2)) * scale
        attn = T.softmax_lastdim(scores)
        self.last_attention = attn.data
        attn = T.dropout(attn, self.dropout, self.training, self._rng)
        ctx = T.matmul(attn, v).swapaxes(-2, -3).reshape(*lead, C, D)
        return self.out(ctx)


class EncoderLayer(Module):
    """Post-norm block: ``LN(x + MSA(x))`` then ``LN(h + FFN(h))``."""

    def __init__(self, cfg: EncoderConfig, rng):
        self.attention = MultiHeadSelfAttention(cfg.d_model, cfg.n_heads, cfg.dropout, rng)
        self.norm1 = LayerNorm(cfg.d_model)
        self.ff1 = Linear(cfg.d_model, cfg.d_ff, rng)
        self.ff2 = Linear(cfg.d_ff, cfg.d_model, rng)
        self.norm2 = LayerNorm(cfg.d_model)
        self.dropout = cfg.dropout
        self._rng = rng

    def _drop(self, x):
        return T.dropout(x, self.dropout, self.training, self._rng)

    def __call__(self, h: Tensor) -> Tensor:
        h = self.norm1(h + self._drop(self.attention(h)))
        y = self.ff2(self._drop(T.gelu(self.ff1(h))))
        return self.norm2(h + self._drop(y))


class ChannelEncoder(Module):
    """Embeds each variate (length ``L``) into ``d_model``, attends across variates,
    projects back to ``L`` and adds the result to the input band."""

    def __init__(self, seq_len: int, cfg: EncoderConfig, rng):
        self.embed = Linear(seq_len, cfg.d_model, rng)
        self.layers = [EncoderLayer(cfg, rng) for _ in range(cfg.e_layers)]
        self.project = Linear(cfg.d_model, seq_len, rng)

    def embed_variate(self, band: Tensor) -> Tensor:
        if band.shape[-1] != self.embed.n_in:
            raise DimensionError(
                f"band length {band.shape[-1]} does not match embed width {self.embed.n_in}")
        return self.embed(band)

    def __call__(self, band: Tensor) -> Tensor:
        h = self.embed_variate(band)
        for layer in self.layers:
            h = layer(h)
        return band + self.project(h)


def embed_variate(band: Tensor, encoder: ChannelEncoder) -> Tensor:
    return encoder.embed_variate(band)


def encoder_layer(h: Tensor, layer: EncoderLayer) -> Tensor:
    return layer(h)


def encode_band(band: Tensor, encoder: ChannelEncoder, training: bool = False) -> Tensor:
    encoder.train(training)
    return encoder(band)
