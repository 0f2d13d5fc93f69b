"""Sectioned key-value run configuration ([model], [train], [data], [ablation]).

Keys under ``[model]`` and ``[train]`` mirror the hyper-parameter table
columns, so a reference row transcribes one-to-one::

    [model]
    lookback = 96
    horizon = 96
    d_model = 64
    d_ff = 1024
    e_layers = 1
    dropout = 0.28
    J = 1
    wavelet = db2
    patch = 24

    [train]
    lr = 1.51e-3
    batch = 256

    [data]
    dataset = ETTh1
"""
from __future__ import annotations

import configparser
import io
import re
from dataclasses import dataclass, field
from pathlib import Path

from .data import DatasetSpec, load_csv, load_registry
from .errors import ConfigurationError
from .model import ABLATION_FLAGS, ModelConfig
from .train import TrainConfig


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt(conv):
    def parse(text):
        return None if text.strip() in ("", "none", "None") else conv(text)
    return parse


# key -> (target field, converter)
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "model": {
        "lookback": ("lookback", int),
        "horizon": ("horizon", int),
        "channels": ("channels", int),
        "patch": ("patch_size", int),
        "J": ("wavelet_levels", int),
        "wavelet": ("wavelet", str),
        "d_model": ("d_model", int),
        "d_ff": ("d_ff", int),
        "e_layers": ("e_layers", int),
        "n_heads": ("n_heads", _opt(int)),
        "dropout": ("dropout", float),
        "mp_depth": ("mp_depth", int),
        "precision": ("precision", str),
        "seed": ("seed", int),
    },
    "train": {
        "lr": ("lr", float),
        "batch": ("batch", int),
        "epochs": ("epochs", int),
        "patience": ("patience", int),
        "seed": ("seed", int),
        "clip": ("clip", _opt(float)),
        "max_batches": ("max_batches", _opt(int)),
    },
    "data": {
        "dataset": ("dataset", str),
        "registry": ("registry", str),
        "path": ("path", str),
        "date_column": ("date_column", str),
        "channels": ("channels", str),
        "splits": ("splits", str),
    },
    "ablation": {flag: (flag, _bool) for flag in ABLATION_FLAGS},
}


class ConfigError(ConfigurationError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path or '<config>'}" + (f":{line}" if line else "")
        super().__init__(f"{where}: {message}")
        self.line = line


@dataclass
class RunConfig:
    model: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    ablation: dict = field(default_factory=dict)
    out: str = "runs"
    source: str = ""

    def dataset_spec(self) -> DatasetSpec:
        d = self.data
        spec = None
        if "dataset" in d:
            registry = load_registry(d.get("registry"))
            if d["dataset"] not in registry:
                raise ConfigError(f"unknown dataset {d['dataset']!r}; registry has "
                                  f"{', '.join(registry)}", path=self.source)
            spec = registry[d["dataset"]]
        elif "path" not in d:
            raise ConfigError("[data] needs either dataset or path", path=self.source)
        if spec is None:
            spec = DatasetSpec(path=d["path"], name=Path(d["path"]).stem)
        if "path" in d:
            spec.path = d["path"]
        if "date_column" in d:
            spec.date_column = d["date_column"]
        if "channels" in d:
            ch = d["channels"].strip()
            spec.channels = None if ch == "*" else tuple(c.strip() for c in ch.split(","))
        if "splits" in d:
            spec.splits = tuple(int(v) for v in d["splits"].split(","))
        return spec

    @property
    def dataset_name(self) -> str:
        return self.data.get("dataset") or Path(self.data.get("path", "data")).stem

    def channel_count(self, data_dir=None) -> int:
        if "channels" in self.model:
            return int(self.model["channels"])
        spec = self.dataset_spec()
        if spec.channels is not None:
            return len(spec.channels)
        _, names = load_csv(spec.resolve(data_dir), spec)
        return len(names)

    def model_config(self, channels: int | None = None) -> ModelConfig:
        values = {SCHEMA["model"][k][0]: v for k, v in self.model.items()}
        if channels is not None:
            values["channels"] = channels
        values.update(self.ablation)
        try:
            return ModelConfig(**values)
        except TypeError as exc:
            raise ConfigError(str(exc), path=self.source) from exc

    def train_config(self) -> TrainConfig:
        values = {SCHEMA["train"][k][0]: v for k, v in self.train.items() if k != "max_batches"}
        return TrainConfig(**values)

    @property
    def max_batches(self) -> int | None:
        return self.train.get("max_batches")

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        for section in ("model", "train", "data", "ablation"):
            parser[section] = {k: "" if v is None else str(v)
                               for k, v in getattr(self, section).items()}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def _line_index(text: str) -> dict[tuple[str, str], int]:
    index, section = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            index[(section, "")] = no
        elif section and s and not s.startswith(("#", ";")):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            index[(section, key)] = no
    return index


def _convert(section: str, key: str, raw: str, line, path) -> object:
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]", line, path)
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]", line, path)
    conv = SCHEMA[section][key][1]
    try:
        return conv(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}", line, path) from None


def parse_text(text: str, path: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigError(exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc),
                          line, path) from None
    lines = _line_index(text)
    run = RunConfig(source=path)
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, "")), path)
        for key, raw in parser[section].items():
            getattr(run, section)[key] = _convert(section, key, raw, lines.get((section, key)), path)
    return run


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}", path=p)
    return parse_text(p.read_text(encoding="utf-8"), str(p))


def apply_overrides(run: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.key=value`` strings in order."""
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        target = getattr(run, section) if section in SCHEMA else None
        if target is None:
            raise ConfigError(f"override {item!r}: unknown section [{section}]")
        target[key] = _convert(section, key, value, None, "--set")
    return run
