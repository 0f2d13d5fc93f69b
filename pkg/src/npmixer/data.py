"""CSV ingestion, chronological splits, train-statistics scaling and windowing."""
from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, IngestionError

STD_FLOOR = 1e-8


@dataclass
class DatasetSpec:
    path: str
    date_column: str = "date"
    channels: tuple[str, ...] | None = None  # None: every non-date column, file order
    splits: tuple[int, int, int] = (0, 0, 0)
    name: str = ""

    def resolve(self, data_dir: str | os.PathLike | None = None) -> Path:
        p = Path(self.path).expanduser()
        if p.is_absolute():
            return p
        root = data_dir or os.environ.get("NPMIXER_DATA_DIR") or "."
        return Path(root) / p


@dataclass
class WindowSample:
    inputs: np.ndarray  # [C, L]
    target: np.ndarray  # [C, H]
    start: int


@dataclass
class Splits:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    channels: tuple[str, ...] = field(default_factory=tuple)

    def get(self, name: str) -> np.ndarray:
        if name not in ("train", "val", "test"):
            raise ConfigurationError(f"unknown split {name!r}")
        return getattr(self, name)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        """Map standardised ``[..., C, T]`` values back to original units."""
        return values * self.std[:, None] + self.mean[:, None]


def load_csv(path, spec: DatasetSpec | None = None) -> tuple[np.ndarray, tuple[str, ...]]:
    """Read a header-plus-rows CSV into a ``[C, T]`` float64 array.

    Returns the array and the channel names in column order.
    """
    spec = spec or DatasetSpec(path=str(path))
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if spec.date_column and spec.date_column not in header:
            raise IngestionError(f"{path}: missing date column {spec.date_column!r}")
        if spec.channels is None:
            channels = tuple(h for h in header if h != spec.date_column)
        else:
            channels = tuple(spec.channels)
            absent = [c for c in channels if c not in header]
            if absent:
                raise IngestionError(f"{path}: missing columns {absent}")
        cols = [header.index(c) for c in channels]
        date_col = header.index(spec.date_column) if spec.date_column else None
        rows, last_date = [], None
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(
                    f"{path}: row {row_no} (line {row_no + 1}) has {len(row)} cells, "
                    f"expected {len(header)}")
            if date_col is not None:
                try:
                    stamp = datetime.fromisoformat(row[date_col].strip())
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {row_no} (line {row_no + 1}) has unparseable date "
                        f"{row[date_col]!r}") from None
                if last_date is not None and stamp <= last_date:
                    raise IngestionError(
                        f"{path}: row {row_no} (line {row_no + 1}) is not in chronological order")
                last_date = stamp
            try:
                rows.append([float(row[c]) for c in cols])
            except ValueError:
                bad = next(header[c] for c in cols if not _is_float(row[c]))
                raise IngestionError(
                    f"{path}: row {row_no} (line {row_no + 1}) column {bad!r} is not numeric") from None
            if not np.all(np.isfinite(rows[-1])):
                raise IngestionError(f"{path}: row {row_no} (line {row_no + 1}) has a missing value")
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64).T.copy(), channels


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def split_and_standardize(series: np.ndarray, spec: DatasetSpec,
                          channels: tuple[str, ...] = ()) -> Splits:
    """Cut ``[C, T]`` into contiguous train/val/test and scale all three with train stats."""
    n_train, n_val, n_test = spec.splits
    T = series.shape[1]
    if min(spec.splits) < 1 or n_train + n_val + n_test > T:
        raise ConfigurationError(
            f"split sizes {spec.splits} do not fit a series of length {T}")
    train = series[:, :n_train]
    val = series[:, n_train:n_train + n_val]
    test = series[:, n_train + n_val:n_train + n_val + n_test]
    mean = train.mean(axis=1)
    std = np.maximum(train.std(axis=1), STD_FLOOR)

    def scale(a):
        return (a - mean[:, None]) / std[:, None]

    return Splits(scale(train), scale(val), scale(test), mean, std, tuple(channels))


def window_count(length: int, L: int, H: int) -> int:
    return length - L - H + 1


def window_starts(length: int, L: int, H: int, shuffle: bool = False,
                  seed: int | np.random.Generator | None = None) -> np.ndarray:
    n = window_count(length, L, H)
    if n < 1:
        raise ConfigurationError(
            f"split of length {length} is too short for look-back {L} plus horizon {H}")
    starts = np.arange(n)
    if shuffle:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        starts = rng.permutation(starts)
    return starts


def window_iter(split: np.ndarray, L: int, H: int, shuffle: bool = False,
                seed: int | None = None) -> Iterator[WindowSample]:
    for s in window_starts(split.shape[1], L, H, shuffle, seed):
        s = int(s)
        yield WindowSample(split[:, s:s + L], split[:, s + L:s + L + H], s)


def window_batches(split: np.ndarray, L: int, H: int, batch: int, shuffle: bool = False,
                   seed: int | np.random.Generator | None = None
                   ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(inputs [B, C, L], targets [B, C, H])`` mini-batches."""
    starts = window_starts(split.shape[1], L, H, shuffle, seed)
    view = np.lib.stride_tricks.sliding_window_view(split, L + H, axis=1)  # [C, n, L+H]
    for i in range(0, len(starts), batch):
        win = view[:, starts[i:i + batch]].transpose(1, 0, 2)
        yield np.ascontiguousarray(win[..., :L]), np.ascontiguousarray(win[..., L:])


def load_registry(path=None) -> dict[str, DatasetSpec]:
    """Parse a dataset registry; defaults to the bundled ``datasets.ini``."""
    parser = configparser.ConfigParser()
    if path is None:
        parser.read_string(resources.files("npmixer.configs").joinpath("datasets.ini").read_text())
    else:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    registry = {}
    for name in parser.sections():
        sec = parser[name]
        chans = sec.get("channels", "*").strip()
        registry[name] = DatasetSpec(
            path=sec["path"],
            date_column=sec.get("date_column", "date"),
            channels=None if chans == "*" else tuple(c.strip() for c in chans.split(",")),
            splits=tuple(int(v) for v in sec["splits"].split(",")),
            name=name,
        )
    return registry


def load_dataset(spec: DatasetSpec, data_dir=None) -> Splits:
    series, channels = load_csv(spec.resolve(data_dir), spec)
    return split_and_standardize(series, spec, channels)
