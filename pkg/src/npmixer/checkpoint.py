"""Versioned binary checkpoint container.

Layout (all integers little-endian)::

    b"NPMXCKPT"                      8-byte magic
    uint32   format version          currently 1
    uint64   n                       length of the config block
    n bytes  config                  UTF-8 JSON, sorted keys, no whitespace
    uint64   m                       length of the manifest block
    m bytes  manifest                UTF-8 JSON object:
               tensors: [{name, shape, dtype, offset, nbytes}, ...]
               rng_state, optimizer (step + hyper-parameters or null), extra
    payload                          raw tensor bytes; ``offset`` counts from
                                     the first payload byte

Tensor dtypes are numpy little-endian codes ``<f8`` / ``<f4``. Optimizer
moment buffers are stored as tensors named ``optim.m.<param>`` and
``optim.v.<param>``.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DimensionError
from .model import ModelConfig, NPMixer, create_model

MAGIC = b"NPMXCKPT"
VERSION = 1


class CheckpointError(ConfigurationError):
    """The file is not a readable checkpoint or does not fit the model."""


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save(path, model: NPMixer, optimizer=None, extra: dict | None = None) -> None:
    arrays: list[tuple[str, np.ndarray]] = [(n, t.data) for n, t in model.named_tensors()]
    opt_meta = None
    if optimizer is not None:
        opt_meta = optimizer.state_meta()
        for name, (m, v) in optimizer.moments(model).items():
            arrays.append((f"optim.m.{name}", m))
            arrays.append((f"optim.v.{name}", v))
    manifest, offset, blobs = [], 0, []
    for name, arr in arrays:
        le = np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<"))
        raw = le.tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "dtype": le.dtype.str,
                         "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    config = _canonical(model.config.to_dict())
    meta = _canonical({"tensors": manifest, "rng_state": model.rng.bit_generator.state,
                       "optimizer": opt_meta, "extra": extra or {}})
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(config)))
        fh.write(config)
        fh.write(struct.pack("<Q", len(meta)))
        fh.write(meta)
        for raw in blobs:
            fh.write(raw)


def read(path) -> tuple[dict, dict, dict[str, np.ndarray]]:
    """Return ``(config, manifest, arrays)`` without building a model."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not an npmixer checkpoint")
    try:
        (version,) = struct.unpack_from("<I", data, 8)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        pos = 12
        (n,) = struct.unpack_from("<Q", data, pos)
        config = json.loads(data[pos + 8:pos + 8 + n])
        pos += 8 + n
        (m,) = struct.unpack_from("<Q", data, pos)
        meta = json.loads(data[pos + 8:pos + 8 + m])
        base = pos + 8 + m
        arrays = {}
        for entry in meta["tensors"]:
            start = base + entry["offset"]
            buf = data[start:start + entry["nbytes"]]
            if len(buf) != entry["nbytes"]:
                raise CheckpointError(f"{path}: truncated payload for {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(buf, dtype=entry["dtype"]).reshape(entry["shape"])
    except (struct.error, ValueError, KeyError) as exc:
        raise CheckpointError(f"{path}: corrupted checkpoint ({exc})") from exc
    return config, meta, arrays


def load_into(model: NPMixer, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    tensors = dict(model.named_tensors())
    missing = sorted(set(tensors) - set(arrays))
    if missing:
        raise CheckpointError(f"checkpoint lacks tensors: {missing[:5]}")
    for name, t in tensors.items():
        arr = arrays[name]
        if arr.shape != t.shape:
            raise DimensionError(f"tensor {name}: checkpoint shape {arr.shape} != model shape {t.shape}")
        t.data[...] = arr.astype(t.data.dtype)
    model.rng.bit_generator.state = meta["rng_state"]


def load(path, expect: ModelConfig | None = None) -> tuple[NPMixer, dict]:
    """Rebuild the model stored at ``path``; returns ``(model, manifest)``."""
    config, meta, arrays = read(path)
    cfg = ModelConfig.from_dict(config)
    if expect is not None:
        for key in ("lookback", "horizon", "channels", "patch_size", "wavelet_levels",
                    "d_model", "d_ff", "e_layers", "mp_depth", *(
                        "no_swt", "no_neighboring_mixer", "no_channel_encoder")):
            if getattr(cfg, key) != getattr(expect, key):
                raise CheckpointError(
                    f"checkpoint {key}={getattr(cfg, key)} does not match config {getattr(expect, key)}")
    model = create_model(cfg)
    load_into(model, meta, arrays)
    meta["_arrays"] = {k: v for k, v in arrays.items() if k.startswith("optim.")}
    return model, meta
