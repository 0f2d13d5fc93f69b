"""Non-overlapping patching and the hierarchical neighbouring-patch mixer.

Level ``k`` (1-based) cuts each channel's sequence into blocks of
``2**(k-1) * patch`` samples. Each adjacent pair of blocks, concatenated, goes
through that level's MLP to give one relation per pair. With ``alpha`` the
sigmoid of a learned gate logit, block 0 adds ``alpha`` times the first
relation and every later block adds ``1 - alpha`` times the relation it shares
with its predecessor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import DimensionError, ParameterError
from .nn import MLP, Module, param
from .tensor import Tensor


@dataclass
class PatchGrid:
    data: Tensor  # [..., C, N, P]
    pad_len: int
    orig_len: int

    @property
    def n_patches(self) -> int:
        return self.data.shape[-2]

    @property
    def patch_len(self) -> int:
        return self.data.shape[-1]


def n_patches(seq_len: int, patch: int) -> int:
    return -(-seq_len // patch)


def n_levels(num_patches: int) -> int:
    """``floor(log2 N)``; zero when there is a single patch."""
    return int(math.floor(math.log2(num_patches))) if num_patches >= 2 else 0


def patchify(x: Tensor, patch: int) -> PatchGrid:
    if patch < 1:
        raise ParameterError(f"patch size must be >= 1, got {patch}")
    x = T.as_tensor(x)
    L = x.shape[-1]
    pad = (-L) % patch
    if pad:
        zeros = T.as_tensor(np.zeros(x.shape[:-1] + (pad,), dtype=x.data.dtype))
        x = T.concat([x, zeros], axis=-1)
    N = (L + pad) // patch
    return PatchGrid(x.reshape(*x.shape[:-1], N, patch), pad, L)


def unpatchify(grid: PatchGrid) -> Tensor:
    d = grid.data
    flat = d.reshape(*d.shape[:-2], d.shape[-2] * d.shape[-1])
    if grid.pad_len:
        flat = flat[..., :grid.orig_len]
    return flat


class SinglePatchMLP(Module):
    """Residual two-layer MLP applied to every patch with shared weights."""

    def __init__(self, patch: int, hidden: int, dropout: float, rng):
        self.mlp = MLP([patch, hidden, patch], dropout, rng)

    def __call__(self, grid: PatchGrid) -> PatchGrid:
        return PatchGrid(grid.data + self.mlp(grid.data), grid.pad_len, grid.orig_len)


def sp_mlp(grid: PatchGrid, w: SinglePatchMLP, training: bool = False) -> PatchGrid:
    w.train(training)
    return w(grid)


class LevelMixer(Module):
    """Pair MLP (``2*block -> block -> ... -> block``) and gate logit for one hierarchy level."""

    def __init__(self, block: int, depth: int, dropout: float, rng):
        if depth < 1:
            raise ParameterError(f"MP-MLP depth must be >= 1, got {depth}")
        self.block = block
        self.mlp = MLP([2 * block] + [block] * depth, dropout, rng)
        self.gate = param(np.zeros(()))

    def alpha(self) -> Tensor:
        return T.sigmoid(self.gate)


def mp_mlp_pair(block: Tensor, successor: Tensor, level: LevelMixer,
                training: bool = False) -> Tensor:
    if block.shape[-1] != level.block or successor.shape[-1] != level.block:
        raise DimensionError(f"pair blocks {block.shape[-1]}/{successor.shape[-1]} "
                             f"do not match level size {level.block}")
    level.train(training)
    return level.mlp(T.concat([block, successor], axis=-1))


def level_mix(blocks: Tensor, relations: Tensor, alpha) -> Tensor:
    """Gated asymmetric update on stacked blocks ``[..., B, S]`` with ``relations [..., B-1, S]``."""
    B = blocks.shape[-2]
    if B < 2 or relations.shape[-2] != B - 1:
        raise DimensionError(f"need B >= 2 blocks and B-1 relations, got {B} and {relations.shape[-2]}")
    alpha = T.as_tensor(alpha)
    first = relations[..., :1, :] * alpha
    rest = relations * (1.0 - alpha)
    return blocks + T.concat([first, rest], axis=-2)


class NeighboringMixer(Module):
    """All ``K`` levels for a grid of ``N`` patches of length ``P``."""

    def __init__(self, num_patches: int, patch: int, depth: int, dropout: float, rng):
        self.patch = patch
        self.num_patches = num_patches
        self.levels = [LevelMixer(2 ** k * patch, depth, dropout, rng)
                       for k in range(n_levels(num_patches))]

    def level_plan(self) -> list[tuple[int, int, int]]:
        """``(block_size, block_count, pair_count)`` for each level."""
        total = self.num_patches * self.patch
        plan = []
        for lvl in self.levels:
            b = total // lvl.block
            plan.append((lvl.block, b, b - 1))
        return plan

    def __call__(self, grid: PatchGrid, max_levels: int | None = None) -> PatchGrid:
        d = grid.data
        lead = d.shape[:-2]
        total = d.shape[-2] * d.shape[-1]
        flat = d.reshape(*lead, total)
        for lvl in self.levels[:max_levels]:
            size = lvl.block
            count = total // size
            used = count * size
            head = flat[..., :used] if used < total else flat
            blocks = head.reshape(*lead, count, size)
            rel = lvl.mlp(T.concat([blocks[..., :-1, :], blocks[..., 1:, :]], axis=-1))
            blocks = level_mix(blocks, rel, lvl.alpha())
            mixed = blocks.reshape(*lead, used)
            flat = T.concat([mixed, flat[..., used:]], axis=-1) if used < total else mixed
        return PatchGrid(flat.reshape(d.shape), grid.pad_len, grid.orig_len)


def hierarchy_forward(grid: PatchGrid, w: NeighboringMixer, training: bool = False,
                      max_levels: int | None = None) -> PatchGrid:
    w.train(training)
    return w(grid, max_levels)


class MixerBranch(Module):
    """patchify -> single-patch MLP -> hierarchy -> unpatchify for one sub-band."""

    def __init__(self, seq_len: int, patch: int, sp_hidden: int, depth: int,
                 dropout: float, rng, hierarchy: bool = True):
        self.seq_len = seq_len
        self.patch = patch
        self.sp = SinglePatchMLP(patch, sp_hidden, dropout, rng)
        self.hierarchy = (NeighboringMixer(n_patches(seq_len, patch), patch, depth, dropout, rng)
                          if hierarchy else None)

    def __call__(self, x: Tensor) -> Tensor:
        grid = self.sp(patchify(x, self.patch))
        if self.hierarchy is not None:
            grid = self.hierarchy(grid)
        return unpatchify(grid)
