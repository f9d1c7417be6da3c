"""Block-compressed datacubes.

A compression factor slices every dimension with strictly increasing
boundaries; each block of the induced grid stores two aggregates,
(count of non-null cells, sum of cell values).  Query planning later splits
an arbitrary range into blocks totally contained in it and blocks it only
partially overlaps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product as _iproduct
from math import prod
from typing import Iterator, Sequence

from .core import Coords, Datacube, Range
from .errors import FactorError, OutOfBoundsError


@dataclass(frozen=True)
class CompressionFactor:
    """Per-dimension boundary arrays f_q with 0 = f_q[0] < ... < f_q[m_q] = n_q."""

    boundaries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        bounds = tuple(tuple(int(v) for v in axis) for axis in self.boundaries)
        object.__setattr__(self, "boundaries", bounds)
        if not bounds:
            raise FactorError("factor needs at least one dimension")
        for axis in bounds:
            if len(axis) < 2 or axis[0] != 0:
                raise FactorError(f"boundary array must start at 0, got {axis}")
            if any(a >= b for a, b in zip(axis, axis[1:])):
                raise FactorError(f"boundaries must strictly increase, got {axis}")

    @property
    def ndim(self) -> int:
        return len(self.boundaries)

    @property
    def dims(self) -> Coords:
        """Cube dimensions the factor partitions (last boundary per axis)."""
        return tuple(axis[-1] for axis in self.boundaries)

    @property
    def shape(self) -> Coords:
        """Number of blocks per dimension."""
        return tuple(len(axis) - 1 for axis in self.boundaries)

    @property
    def block_count(self) -> int:
        return prod(self.shape)

    def block_range(self, index: Sequence[int]) -> Range:
        """Cell range of block ``index`` (1-based block coordinates)."""
        lo = []
        hi = []
        for k, axis in zip(index, self.boundaries):
            if not 1 <= k <= len(axis) - 1:
                raise OutOfBoundsError(f"block index {tuple(index)} outside grid {self.shape}")
            lo.append(axis[k - 1] + 1)
            hi.append(axis[k])
        return Range(tuple(lo), tuple(hi))

    def block_indices(self) -> Iterator[Coords]:
        """All block indices in row-major order."""
        return _iproduct(*(range(1, m + 1) for m in self.shape))

    @classmethod
    def equal_width(cls, dims: Sequence[int], blocks: Sequence[int]) -> "CompressionFactor":
        """Split each dimension into ``blocks[q]`` parts of equal width.

        Remainder cells go to the last block of the dimension.
        """
        if len(tuple(blocks)) != len(tuple(dims)):
            raise FactorError("blocks arity does not match dims arity")
        axes = []
        for n, m in zip(dims, blocks):
            if not 1 <= m <= n:
                raise FactorError(f"cannot split a dimension of length {n} into {m} blocks")
            width = n // m
            axis = [width * i for i in range(m)] + [n]
            axes.append(tuple(axis))
        return cls(tuple(axes))

    @classmethod
    def from_block_shape(cls, dims: Sequence[int], shape: Sequence[int]) -> "CompressionFactor":
        """Build boundaries from a target block cell-shape (remainder to the last block)."""
        if len(tuple(shape)) != len(tuple(dims)):
            raise FactorError("block shape arity does not match dims arity")
        axes = []
        for n, w in zip(dims, shape):
            if not 1 <= w <= n:
                raise FactorError(f"block extent {w} does not fit a dimension of length {n}")
            cuts = [c for c in range(0, n, w) if n - c >= w]
            axes.append(tuple(cuts + [n]))
        return cls(tuple(axes))


@dataclass(frozen=True)
class BlockSummary:
    """Aggregates of a single block: t non-null cells summing to s."""

    index: Coords
    range: Range
    count: int
    sum: int

    def __post_init__(self) -> None:
        if not 0 <= self.count <= self.range.size:
            raise ValueError(f"block {self.index}: count {self.count} outside [0..{self.range.size}]")
        if self.count > self.sum:
            raise ValueError(f"block {self.index}: count {self.count} exceeds sum {self.sum}")
        if (self.sum == 0) != (self.count == 0):
            raise ValueError(f"block {self.index}: sum {self.sum} and count {self.count} disagree on emptiness")

    @property
    def size(self) -> int:
        """Total number of cells in the block."""
        return self.range.size


@dataclass(frozen=True)
class CompressedDatacube:
    """A factor plus the dense grid of block summaries (row-major)."""

    factor: CompressionFactor
    blocks: tuple[BlockSummary, ...]

    def __post_init__(self) -> None:
        expected = list(self.factor.block_indices())
        if [b.index for b in self.blocks] != expected:
            raise FactorError("block grid does not tile the factor in row-major order")
        for blk in self.blocks:
            if blk.range != self.factor.block_range(blk.index):
                raise FactorError(f"block {blk.index} carries a range inconsistent with the factor")

    @property
    def dims(self) -> Coords:
        return self.factor.dims

    def block(self, index: Sequence[int]) -> BlockSummary:
        off = 0
        for k, m in zip(index, self.factor.shape):
            if not 1 <= k <= m:
                raise OutOfBoundsError(f"block index {tuple(index)} outside grid {self.factor.shape}")
            off = off * m + (k - 1)
        return self.blocks[off]

    def total_count(self) -> int:
        return sum(b.count for b in self.blocks)

    def total_sum(self) -> int:
        return sum(b.sum for b in self.blocks)


@dataclass(frozen=True)
class RangeDecomposition:
    """Blocks totally contained in a query and clipped partial overlaps."""

    total: tuple[Coords, ...]
    partial: tuple[tuple[Coords, Range], ...]


def build_summary(cube: Datacube, factor: CompressionFactor) -> CompressedDatacube:
    """Aggregate every block of the factor over the cube."""
    if factor.dims != cube.dims:
        raise FactorError(f"factor partitions {factor.dims}, cube has dims {cube.dims}")
    cells = cube.cells
    off = cube.offset
    blocks = []
    for index in factor.block_indices():
        r = factor.block_range(index)
        t = 0
        s = 0
        for c in r.cells():
            v = cells[off(c)]
            if v > 0:
                t += 1
                s += v
        blocks.append(BlockSummary(index, r, t, s))
    return CompressedDatacube(factor, tuple(blocks))


def decompose(summary: CompressedDatacube, query: Range) -> RangeDecomposition:
    """Split a query into totally-contained blocks and clipped partial blocks.

    The clipped regions together with the total blocks tile the query exactly.
    """
    factor = summary.factor
    if query.ndim != factor.ndim:
        raise OutOfBoundsError(f"query arity {query.ndim} does not match cube arity {factor.ndim}")
    for hi_q, n in zip(query.hi, factor.dims):
        if hi_q > n:
            raise OutOfBoundsError(f"query {query} outside cube dims {factor.dims}")

    # Per dimension, the contiguous run of block indices overlapping the query.
    index_runs = []
    for lo_q, hi_q, axis in zip(query.lo, query.hi, factor.boundaries):
        first = next(k for k in range(1, len(axis)) if axis[k] >= lo_q)
        last = next(k for k in range(len(axis) - 1, 0, -1) if axis[k - 1] + 1 <= hi_q)
        index_runs.append(range(first, last + 1))

    total: list[Coords] = []
    partial: list[tuple[Coords, Range]] = []
    for index in _iproduct(*index_runs):
        block_range = factor.block_range(index)
        if query.contains(block_range):
            total.append(index)
        else:
            clip = query.intersect(block_range)
            assert clip is not None  # index_runs only yields overlapping blocks
            partial.append((index, clip))
    return RangeDecomposition(tuple(total), tuple(partial))


# ---------------------------------------------------------------------------
# JSON persistence (lossless round trip).
# ---------------------------------------------------------------------------


def summary_to_dict(summary: CompressedDatacube) -> dict:
    return {
        "boundaries": [list(axis) for axis in summary.factor.boundaries],
        "blocks": [
            {"index": list(b.index), "count": b.count, "sum": b.sum}
            for b in summary.blocks
        ],
    }


def summary_from_dict(payload: dict) -> CompressedDatacube:
    factor = CompressionFactor(tuple(tuple(axis) for axis in payload["boundaries"]))
    by_index = {tuple(b["index"]): b for b in payload["blocks"]}
    blocks = []
    for index in factor.block_indices():
        if index not in by_index:
            raise FactorError(f"summary file is missing block {index}")
        raw = by_index[index]
        blocks.append(
            BlockSummary(index, factor.block_range(index), int(raw["count"]), int(raw["sum"]))
        )
    return CompressedDatacube(factor, tuple(blocks))


def save_summary(summary: CompressedDatacube, path: str) -> None:
    with open(path, "w") as handle:
        json.dump(summary_to_dict(summary), handle)


def load_summary(path: str) -> CompressedDatacube:
    with open(path) as handle:
        payload = json.load(handle)
    try:
        return summary_from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise FactorError(f"malformed summary file {path}: {exc}")
