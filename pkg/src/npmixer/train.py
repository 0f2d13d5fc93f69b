"""Adam, MSE training with early stopping, and MSE/MAE evaluation."""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tensor as T
from .data import Splits, window_batches, window_count
from .errors import ConfigurationError, ContractError, DivergenceError
from .model import NPMixer, _dtype

log = logging.getLogger(__name__)

LOG_FIELDS = ("epoch", "train_loss", "val_mse", "val_mae", "seconds")


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch: int = 32
    epochs: int = 30
    patience: int = 5
    seed: int = 0
    clip: float | None = None

    def __post_init__(self):
        if not self.lr >= 0:
            raise ConfigurationError(f"learning rate must be >= 0, got {self.lr}")
        if self.batch < 1:
            raise ConfigurationError(f"batch size must be >= 1, got {self.batch}")
        if self.patience < 1:
            raise ConfigurationError(f"patience must be >= 1, got {self.patience}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")


class Adam:
    """Bias-corrected Adam over named parameters."""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, T.Tensor], lr: float) -> None:
        for name, p in params.items():
            if p.grad is None:
                raise ContractError(f"parameter {name!r} has no gradient")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for name, p in params.items():
            g = p.grad
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.grad = np.zeros_like(p.data)

    def state_meta(self) -> dict:
        return {"step": self.step_count, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}

    def moments(self, model=None) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {k: (self.m[k], self.v[k]) for k in self.m}


def adam_step(params: dict[str, T.Tensor], state: Adam, lr: float) -> None:
    state.step(params, lr)


def mse_loss(pred: T.Tensor, target) -> T.Tensor:
    return T.mean(T.square(pred - target))


def _clip(params, max_norm: float) -> None:
    total = math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params))
    if total > max_norm:
        scale = max_norm / (total + 1e-12)
        for p in params:
            p.grad = p.grad * scale


def evaluate(model: NPMixer, split: np.ndarray, L: int, H: int, batch: int = 256) -> dict:
    """MSE and MAE over every window, channel and horizon step of ``split``."""
    if split.size == 0 or window_count(split.shape[1], L, H) < 1:
        raise ConfigurationError("evaluation split has no complete windows")
    sq = ab = 0.0
    n = 0
    model.eval()
    with _dtype(model.config.precision), T.no_grad():
        for x, y in window_batches(split, L, H, batch):
            err = model(x).data - y
            sq += float(np.sum(err * err, dtype=np.float64))
            ab += float(np.sum(np.abs(err), dtype=np.float64))
            n += err.size
    return {"mse": sq / n, "mae": ab / n}


@dataclass
class TrainResult:
    log: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_val_mse: float = math.inf
    stopped_epoch: int = 0
    best_state: dict | None = None
    optimizer: Adam | None = None


def snapshot(model: NPMixer) -> dict:
    return {"tensors": {n: t.data.copy() for n, t in model.named_tensors()},
            "rng": model.rng.bit_generator.state}


def restore(model: NPMixer, state: dict) -> None:
    for n, t in model.named_tensors():
        t.data[...] = state["tensors"][n]
    model.rng.bit_generator.state = state["rng"]


def train_run(model: NPMixer, splits: Splits, cfg: TrainConfig, log_path=None,
              max_batches: int | None = None) -> TrainResult:
    """Train with shuffled mini-batches; keep and finally restore the best-validation weights.

    ``max_batches`` caps the batches per epoch (useful for smoke runs).
    """
    L, H = model.config.lookback, model.config.horizon
    params = dict(model.named_parameters())
    opt = Adam()
    shuffle_rng = np.random.default_rng(cfg.seed)
    result = TrainResult()
    stale = 0
    if log_path is not None:
        log_path = Path(log_path)
        if not log_path.exists():
            with open(log_path, "w", newline="") as fh:
                csv.writer(fh).writerow(LOG_FIELDS)
    with _dtype(model.config.precision):
        for epoch in range(1, cfg.epochs + 1):
            t0 = time.perf_counter()
            model.train()
            losses = []
            for b, (x, y) in enumerate(window_batches(splits.train, L, H, cfg.batch, True, shuffle_rng)):
                if max_batches is not None and b >= max_batches:
                    break
                T.reset_tape()
                loss = mse_loss(model(x), y)
                value = loss.item()
                if not math.isfinite(value):
                    raise DivergenceError(f"non-finite loss at epoch {epoch}, batch {b}")
                T.backward(loss)
                if cfg.clip:
                    _clip(params.values(), cfg.clip)
                opt.step(params, cfg.lr)
                losses.append(value)
            metrics = evaluate(model, splits.val, L, H)
            row = {"epoch": epoch, "train_loss": float(np.mean(losses)),
                   "val_mse": metrics["mse"], "val_mae": metrics["mae"],
                   "seconds": time.perf_counter() - t0}
            result.log.append(row)
            if log_path is not None:
                with open(log_path, "a", newline="") as fh:
                    csv.writer(fh).writerow([row[k] for k in LOG_FIELDS])
            log.info("epoch %d train %.6f val mse %.6f mae %.6f", epoch, row["train_loss"],
                     row["val_mse"], row["val_mae"])
            result.stopped_epoch = epoch
            if metrics["mse"] < result.best_val_mse:
                result.best_val_mse = metrics["mse"]
                result.best_epoch = epoch
                result.best_state = snapshot(model)
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if result.best_state is not None:
        restore(model, result.best_state)
    result.optimizer = opt
    return result
