"""NPMixer assembly: RevIN -> LSWT -> per-band encoder/mixer -> ISWT -> projection -> RevIN."""
from __future__ import annotations

import contextlib
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import tensor as T
from .encoder import ChannelEncoder, EncoderConfig, default_heads
from .errors import ConfigurationError, DimensionError, StateError
from .lswt import WaveletCoefficients, WaveletFilterBank, iswt_reconstruct, swt_decompose
from .mixer import MixerBranch
from .nn import Linear, Module, param
from .tensor import Tensor
from .wavelets import SUPPORTED

ABLATION_FLAGS = ("no_swt", "fixed_swt", "no_neighboring_mixer", "no_channel_encoder")


@dataclass
class ModelConfig:
    lookback: int = 96
    horizon: int = 96
    channels: int = 7
    patch_size: int = 24
    wavelet_levels: int = 1
    wavelet: str = "db2"
    d_model: int = 64
    d_ff: int = 1024
    e_layers: int = 1
    n_heads: int | None = None
    dropout: float = 0.1
    mp_depth: int = 2
    no_swt: bool = False
    fixed_swt: bool = False
    no_neighboring_mixer: bool = False
    no_channel_encoder: bool = False
    precision: str = "float64"
    seed: int = 0

    def __post_init__(self):
        for name in ("lookback", "horizon", "channels", "patch_size", "wavelet_levels",
                     "d_model", "d_ff", "e_layers", "mp_depth"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.wavelet not in SUPPORTED:
            raise ConfigurationError(
                f"unknown wavelet {self.wavelet!r}; supported: {', '.join(SUPPORTED)}")
        if self.no_swt and self.fixed_swt:
            raise ConfigurationError("no_swt and fixed_swt are mutually exclusive")
        if self.precision not in ("float32", "float64"):
            raise ConfigurationError(f"precision must be float32 or float64, got {self.precision!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.n_heads is not None and self.d_model % self.n_heads:
            raise ConfigurationError(
                f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}")

    @property
    def heads(self) -> int:
        return self.n_heads if self.n_heads is not None else default_heads(self.d_model)

    @property
    def sp_hidden(self) -> int:
        return min(self.d_ff, 4 * self.patch_size)

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(self.d_model, self.d_ff, self.e_layers, self.heads, self.dropout)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)


class RevIN(Module):
    """Per-window instance normalisation with a learnable per-channel affine."""

    def __init__(self, channels: int, eps: float = 1e-5):
        self.weight = param(np.ones(channels))
        self.bias = param(np.zeros(channels))
        self.eps = eps
        self.mean: np.ndarray | None = None
        self.std: np.ndarray | None = None

    def _affine(self):
        C = self.weight.shape[0]
        return self.weight.reshape(C, 1), self.bias.reshape(C, 1)

    def norm(self, x: Tensor) -> Tensor:
        data = x.data
        self.mean = data.mean(axis=-1, keepdims=True)
        self.std = np.sqrt(data.var(axis=-1, keepdims=True) + self.eps)
        w, b = self._affine()
        return (x - self.mean) / self.std * w + b

    def denorm(self, y: Tensor) -> Tensor:
        if self.mean is None:
            raise StateError("RevIN.denorm called before norm")
        w, b = self._affine()
        return (y - b) / w * self.std + self.mean


def revin_norm(x: Tensor, state: RevIN) -> Tensor:
    return state.norm(T.as_tensor(x))


def revin_denorm(y: Tensor, state: RevIN) -> Tensor:
    return state.denorm(T.as_tensor(y))


class FinalProjection(Module):
    """Gated residual bottleneck over time, then a linear map from look-back to horizon.

    ``out(x + gelu(gate(x)))``; weights are shared across channels.
    """

    def __init__(self, seq_len: int, horizon: int, rng):
        self.gate = Linear(seq_len, seq_len, rng)
        self.out = Linear(seq_len, horizon, rng)

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.gate.n_in:
            raise DimensionError(f"projection expects length {self.gate.n_in}, got {x.shape[-1]}")
        return self.out(x + T.gelu(self.gate(x)))


def final_projection(x, gate_w, gate_b, out_w, out_b) -> Tensor:
    x = T.as_tensor(x)
    L = x.shape[-1]
    gate_w, out_w = T.as_tensor(gate_w), T.as_tensor(out_w)
    if gate_w.shape != (L, L) or out_w.shape[0] != L:
        raise DimensionError(
            f"projection weights {gate_w.shape}/{out_w.shape} do not match length {L}")
    z = x + T.gelu(T.matmul(x, gate_w) + gate_b)
    return T.matmul(z, out_w) + out_b


class NPMixer(Module):
    def __init__(self, config: ModelConfig):
        cfg = config
        self.config = cfg
        self.rng = np.random.default_rng(cfg.seed)
        rng = self.rng
        L = cfg.lookback
        self.revin = RevIN(cfg.channels)
        n_bands = 1 if cfg.no_swt else cfg.wavelet_levels + 1
        self.bank = None if cfg.no_swt else WaveletFilterBank(cfg.wavelet, learnable=not cfg.fixed_swt)
        # encoders serve detail bands only; the approximation band (branch 0) bypasses them
        self.encoders = ([] if cfg.no_swt or cfg.no_channel_encoder else
                         [ChannelEncoder(L, cfg.encoder_config(), rng)
                          for _ in range(cfg.wavelet_levels)])
        self.branches = [MixerBranch(L, cfg.patch_size, cfg.sp_hidden, cfg.mp_depth, cfg.dropout,
                                     rng, hierarchy=not cfg.no_neighboring_mixer)
                         for _ in range(n_bands)]
        self.projection = FinalProjection(L, cfg.horizon, rng)

    def decompose(self, xn: Tensor) -> WaveletCoefficients:
        return swt_decompose(xn, self.bank, self.config.wavelet_levels)

    def __call__(self, x, training: bool | None = None) -> Tensor:
        if training is not None:
            self.train(training)
        x = T.as_tensor(x)
        cfg = self.config
        if x.shape[-2:] != (cfg.channels, cfg.lookback):
            raise DimensionError(
                f"input shape {x.shape} does not end in (C={cfg.channels}, L={cfg.lookback})")
        xn = self.revin.norm(x)
        if self.bank is None:
            merged = self.branches[0](xn)
        else:
            coeffs = self.decompose(xn)
            approx = self.branches[0](coeffs.approx)
            details = []
            for m, band in enumerate(coeffs.details):
                if self.encoders:
                    band = self.encoders[m](band)
                details.append(self.branches[m + 1](band))
            merged = iswt_reconstruct(WaveletCoefficients(approx, details), self.bank)
        return self.revin.denorm(self.projection(merged))

    forward = __call__

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def forward(x, model: NPMixer, training: bool = False) -> Tensor:
    return model(x, training)


def build_variant(config: ModelConfig, **flags) -> NPMixer:
    """Build the full model or one ablation; ``flags`` override the config's ablation fields."""
    unknown = set(flags) - set(ABLATION_FLAGS)
    if unknown:
        raise ConfigurationError(f"unknown ablation flags: {sorted(unknown)}")
    if flags:
        config = ModelConfig.from_dict({**config.to_dict(), **flags})
    return NPMixer(config)


@contextlib.contextmanager
def _dtype(precision: str):
    prev = T.get_default_dtype()
    T.set_default_dtype(np.float32 if precision == "float32" else np.float64)
    try:
        yield
    finally:
        T.set_default_dtype(prev)


def create_model(config: ModelConfig) -> NPMixer:
    """Build a model whose tensors use the config's precision."""
    with _dtype(config.precision):
        return NPMixer(config)


def count_params_flops(model: NPMixer, batch: int = 1) -> dict:
    """Exact learnable-parameter count and forward FLOPs (2 x MACs of matmuls and convolutions)."""
    cfg = model.config
    x = np.zeros((batch, cfg.channels, cfg.lookback), dtype=model.revin.weight.data.dtype)
    was_training = model.training
    with T.no_grad(), T.count_macs() as counter:
        model(x, training=False)
    model.train(was_training)
    return {"param_count": model.num_parameters(), "flops": 2 * counter.macs}
