"""Hot loops for dilated circular convolution.

Two interchangeable backends compute the same sums:

* ``numba``: ``@njit`` loops, used when numba imports cleanly.
* ``numpy``: ``np.roll`` accumulation, always available.

Set ``NPMIXER_DISABLE_NUMBA=1`` before import to force the numpy path, or
call :func:`set_backend` at runtime. Both paths agree to rounding error only
(their summation orders differ), so tests compare them at ~1e-12.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAS_NUMBA = False

_DISABLED = os.environ.get("NPMIXER_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}
_backend = "numba" if HAS_NUMBA and not _DISABLED else "numpy"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


# -- numpy reference path ---------------------------------------------------

def _conv_numpy(x, h, d, sign):
    # sign=+1: y[t] = sum_k h[k] x[t - k d]; sign=-1: y[t] = sum_k h[k] x[t + k d]
    L = x.shape[-1]
    out = np.zeros_like(x)
    for k in range(h.shape[0]):
        out += h[k] * np.roll(x, sign * ((k * d) % L), axis=-1)
    return out


def _filter_grad_numpy(gy, x, F, d, sign):
    L = x.shape[-1]
    g = np.empty(F, dtype=x.dtype)
    for k in range(F):
        g[k] = np.sum(gy * np.roll(x, sign * ((k * d) % L), axis=-1))
    return g


# -- numba path -------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _conv_rows(x, h, d, sign):
        R, L = x.shape
        F = h.shape[0]
        out = np.zeros_like(x)
        for r in range(R):
            for t in range(L):
                acc = 0.0
                for k in range(F):
                    acc += h[k] * x[r, (t - sign * k * d) % L]
                out[r, t] = acc
        return out

    @njit(cache=True)
    def _filter_grad_rows(gy, x, F, d, sign):
        R, L = x.shape
        g = np.zeros(F, dtype=x.dtype)
        for k in range(F):
            acc = 0.0
            for r in range(R):
                for t in range(L):
                    acc += gy[r, t] * x[r, (t - sign * k * d) % L]
            g[k] = acc
        return g


def circular_conv(x: np.ndarray, h: np.ndarray, d: int, adjoint: bool = False) -> np.ndarray:
    """Dilated circular convolution along the last axis.

    ``adjoint=False`` is the causal form ``y[t] = sum_k h[k] x[(t - k d) mod L]``;
    ``adjoint=True`` is its transpose ``y[t] = sum_k h[k] x[(t + k d) mod L]``.
    """
    sign = -1 if adjoint else 1
    if _backend == "numba":
        x2 = np.ascontiguousarray(x).reshape(-1, x.shape[-1])
        return _conv_rows(x2, np.ascontiguousarray(h, dtype=x.dtype), d, sign).reshape(x.shape)
    return _conv_numpy(x, h, d, sign)


def circular_conv_filter_grad(gy: np.ndarray, x: np.ndarray, F: int, d: int,
                              adjoint: bool = False) -> np.ndarray:
    """Gradient of ``sum(gy * circular_conv(x, h, d, adjoint))`` w.r.t. ``h``."""
    sign = -1 if adjoint else 1
    if _backend == "numba":
        L = x.shape[-1]
        return _filter_grad_rows(np.ascontiguousarray(gy).reshape(-1, L),
                                 np.ascontiguousarray(x).reshape(-1, L), F, d, sign)
    return _filter_grad_numpy(gy, x, F, d, sign)
