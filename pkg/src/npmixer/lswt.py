"""Learnable stationary (undecimated) wavelet transform and its inverse."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ContractError, ParameterError
from .nn import Module
from .tensor import Tensor
from .wavelets import reference_filters


class WaveletFilterBank(Module):
    """Analysis ``h0, h1`` and synthesis ``g0, g1`` filters, all trainable.

    ``w_init_lo``/``w_init_hi`` keep frozen copies of the starting analysis
    filters, so the learned offset is ``h0 - w_init_lo``.
    """

    def __init__(self, init_name: str = "db1", learnable: bool = True):
        h0, h1, g0, g1 = reference_filters(init_name)
        self.init_name = init_name
        self.h0 = Tensor(h0, requires_grad=learnable)
        self.h1 = Tensor(h1, requires_grad=learnable)
        self.g0 = Tensor(g0, requires_grad=learnable)
        self.g1 = Tensor(g1, requires_grad=learnable)
        self.w_init_lo = Tensor(h0)
        self.w_init_hi = Tensor(h1)

    @property
    def filter_length(self) -> int:
        return self.h0.shape[0]

    def delta(self) -> tuple[np.ndarray, np.ndarray]:
        return self.h0.data - self.w_init_lo.data, self.h1.data - self.w_init_hi.data


def init_filters(init_name: str, learnable: bool = True) -> WaveletFilterBank:
    return WaveletFilterBank(init_name, learnable)


@dataclass
class WaveletCoefficients:
    approx: Tensor
    details: list[Tensor]

    @property
    def levels(self) -> int:
        return len(self.details)

    def bands(self) -> list[Tensor]:
        """Approximation first, then details by level."""
        return [self.approx, *self.details]


def dilation(level: int) -> int:
    """Dilation used at 1-based decomposition level ``level``."""
    return 2 ** (level - 1)


def swt_decompose(x: Tensor, bank: WaveletFilterBank, levels: int) -> WaveletCoefficients:
    if levels < 1:
        raise ParameterError(f"wavelet levels must be >= 1, got {levels}")
    approx = T.as_tensor(x)
    details = []
    for m in range(1, levels + 1):
        d = dilation(m)
        details.append(T.conv1d_dilated_circular(approx, bank.h1, d))
        approx = T.conv1d_dilated_circular(approx, bank.h0, d)
    return WaveletCoefficients(approx, details)


def iswt_reconstruct(coeffs: WaveletCoefficients, bank: WaveletFilterBank,
                     levels: int | None = None) -> Tensor:
    if levels is not None and levels != coeffs.levels:
        raise ContractError(
            f"coefficients carry {coeffs.levels} levels but {levels} were requested")
    approx = coeffs.approx
    for m in range(coeffs.levels, 0, -1):
        d = dilation(m)
        lo = T.conv1d_dilated_circular(approx, bank.g0, d, adjoint=True)
        hi = T.conv1d_dilated_circular(coeffs.details[m - 1], bank.g1, d, adjoint=True)
        approx = (lo + hi) * 0.5
    return approx
