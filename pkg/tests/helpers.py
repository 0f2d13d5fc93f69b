"""Synthetic datasets shared by the training, CLI and acceptance tests."""
import csv
from datetime import datetime, timedelta

import numpy as np


def sinusoids(T: int, periods=(24, 12, 7), phase_seed: int = 0) -> np.ndarray:
    """Noiseless ``[C, T]`` mixture: each channel sums two sinusoids of different period."""
    r = np.random.default_rng(phase_seed)
    t = np.arange(T)
    rows = []
    for c, p in enumerate(periods):
        q = periods[(c + 1) % len(periods)]
        a, b = r.uniform(0, 2 * np.pi, 2)
        rows.append(np.sin(2 * np.pi * t / p + a) + 0.5 * np.sin(2 * np.pi * t / q + b))
    return np.asarray(rows)


def write_csv(path, series: np.ndarray, names=None, date=True, start=datetime(2016, 7, 1)):
    C, T = series.shape
    names = names or [f"c{i}" for i in range(C)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow((["date"] if date else []) + list(names))
        for i in range(T):
            stamp = [(start + timedelta(hours=i)).strftime("%Y-%m-%d %H:%M:%S")] if date else []
            w.writerow(stamp + [repr(float(v)) for v in series[:, i]])
    return path
