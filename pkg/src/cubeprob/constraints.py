"""Null/non-null integrity constraints over datacube regions.

Constraints are stored as disjoint axis-aligned macro-blocks declared either
entirely null or entirely non-null.  For any region D they induce two
monotone lower bounds:

* ``lb_eq0(D)``  -- at least this many cells of D are null,
* ``lb_gt0(D)``  -- at least this many cells of D are non-null,

each computed as the total overlap of D with the macro-blocks of the matching
kind.  From these, any (block, query) pair yields a four-part bound tuple
(lower/upper bound on non-nulls inside the query, and in the whole block)
that the constrained estimators consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .core import Coords, Datacube, Range
from .errors import ConstraintError
from .summary import CompressedDatacube


class MacroKind(str, Enum):
    ALL_NULL = "all_null"
    ALL_NONNULL = "all_nonnull"


@dataclass(frozen=True)
class MacroBlock:
    range: Range
    kind: MacroKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MacroKind(self.kind))


@dataclass(frozen=True)
class ConstraintSet:
    """Disjoint macro-blocks; the empty set means no information."""

    blocks: tuple[MacroBlock, ...] = ()

    def __post_init__(self) -> None:
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for i, a in enumerate(blocks):
            for b in blocks[i + 1 :]:
                if a.range.intersect(b.range) is not None:
                    raise ConstraintError(
                        f"macro-blocks overlap: {a.range} ({a.kind.value}) and {b.range} ({b.kind.value})"
                    )

    def __len__(self) -> int:
        return len(self.blocks)


def lb_eq0(cs: ConstraintSet, r: Range) -> int:
    """Lower bound on the number of null cells in ``r``."""
    return sum(
        m.range.overlap_size(r) for m in cs.blocks if m.kind is MacroKind.ALL_NULL
    )


def lb_gt0(cs: ConstraintSet, r: Range) -> int:
    """Lower bound on the number of non-null cells in ``r``."""
    return sum(
        m.range.overlap_size(r) for m in cs.blocks if m.kind is MacroKind.ALL_NONNULL
    )


@dataclass(frozen=True)
class BoundTuple:
    """Constraint-derived bounds on non-null counts for a query inside a block.

    ``t_lo_in <= count(query) <= t_hi_in`` and
    ``t_lo_blk <= count(block) <= t_hi_blk`` hold in every datacube that
    satisfies the constraints; ``b_in`` and ``b_blk`` are the region sizes.
    """

    t_lo_in: int
    t_hi_in: int
    t_lo_blk: int
    t_hi_blk: int
    b_in: int
    b_blk: int

    def __post_init__(self) -> None:
        if not 0 <= self.t_lo_in <= self.t_hi_in <= self.b_in:
            raise ConstraintError(f"inconsistent in-range bounds {self}")
        if not self.t_lo_blk <= self.t_hi_blk <= self.b_blk:
            raise ConstraintError(f"inconsistent block bounds {self}")
        if self.t_lo_in > self.t_lo_blk:
            raise ConstraintError(f"in-range lower bound exceeds block lower bound {self}")
        complement = self.b_blk - self.b_in
        if not 0 <= self.t_hi_blk - self.t_hi_in <= complement:
            raise ConstraintError(f"complement upper bound outside [0..{complement}]: {self}")
        if self.t_lo_blk - self.t_lo_in > self.t_hi_blk - self.t_hi_in:
            raise ConstraintError(f"complement bounds cross: {self}")

    @property
    def t_lo_out(self) -> int:
        """Lower bound on non-nulls in the complement region (block minus query)."""
        return self.t_lo_blk - self.t_lo_in

    @property
    def t_hi_out(self) -> int:
        """Upper bound on non-nulls in the complement region."""
        return self.t_hi_blk - self.t_hi_in

    @classmethod
    def trivial(cls, b_in: int, b_blk: int) -> "BoundTuple":
        """No constraint information at all: counts range over [0..size]."""
        return cls(0, b_in, 0, b_blk, b_in, b_blk)


def bound_tuple(cs: ConstraintSet, block: Range, query: Range) -> BoundTuple:
    """Bound tuple for ``query`` inside ``block`` under the constraint set.

    The block-level bounds add the complement region's bounds to the in-range
    ones, where the complement (block minus query) overlap of each macro-block
    is its overlap with the block minus its overlap with the query.
    """
    if not block.contains(query):
        raise ConstraintError(f"query {query} not inside block {block}")
    b_in = query.size
    b_blk = block.size
    null_in = 0
    null_blk = 0
    nn_in = 0
    nn_blk = 0
    for m in cs.blocks:
        in_query = m.range.overlap_size(query)
        in_block = m.range.overlap_size(block)
        if m.kind is MacroKind.ALL_NULL:
            null_in += in_query
            null_blk += in_block
        else:
            nn_in += in_query
            nn_blk += in_block
    if null_in + nn_in > b_in or null_blk + nn_blk > b_blk:
        raise ConstraintError("constraints claim more cells than the region holds")
    return BoundTuple(
        t_lo_in=nn_in,
        t_hi_in=b_in - null_in,
        t_lo_blk=nn_blk,
        t_hi_blk=b_blk - null_blk,
        b_in=b_in,
        b_blk=b_blk,
    )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a summary against a constraint set."""

    ok: bool
    block_index: Coords | None = None
    count: int | None = None
    count_lo: int | None = None
    count_hi: int | None = None

    def __bool__(self) -> bool:
        return self.ok

    @property
    def message(self) -> str:
        if self.ok:
            return "ok"
        return (
            f"block {self.block_index}: stored count {self.count} outside "
            f"constraint bounds [{self.count_lo}..{self.count_hi}]"
        )


def validate(cs: ConstraintSet, summary: CompressedDatacube) -> ValidationReport:
    """Check every block's stored count against the constraint bounds.

    Returns a report naming the first violating block instead of raising.
    """
    for blk in summary.blocks:
        lo = lb_gt0(cs, blk.range)
        hi = blk.size - lb_eq0(cs, blk.range)
        if not lo <= blk.count <= hi:
            return ValidationReport(False, blk.index, blk.count, lo, hi)
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# Macro-block detection.
# ---------------------------------------------------------------------------


def _largest_uniform_rectangle(
    rows: int, cols: int, available: list[bool]
) -> tuple[int, tuple[int, int], tuple[int, int]] | None:
    """Largest axis-aligned all-available rectangle in a rows x cols mask.

    Histogram-of-heights with a monotonic stack, O(rows*cols).  Returns
    (area, lo, hi) with 1-based corners, or None when nothing is available.
    Ties resolve to the rectangle found first in row-major scan order.
    """
    best: tuple[int, tuple[int, int], tuple[int, int]] | None = None
    heights = [0] * cols
    for i in range(rows):
        base = i * cols
        for j in range(cols):
            heights[j] = heights[j] + 1 if available[base + j] else 0
        stack: list[int] = []  # column indices with increasing heights
        j = 0
        while j <= cols:
            height = heights[j] if j < cols else 0
            if not stack or heights[stack[-1]] <= height:
                stack.append(j)
                j += 1
                continue
            top = stack.pop()
            h = heights[top]
            left = stack[-1] + 1 if stack else 0
            area = h * (j - left)
            if h and (best is None or area > best[0]):
                best = (area, (i - h + 2, left + 1), (i + 1, j))
    return best


def _detect_2d(cube: Datacube, min_cells: int) -> list[MacroBlock]:
    rows, cols = cube.dims
    cells = cube.cells
    null_mask = [v == 0 for v in cells]
    nonnull_mask = [v > 0 for v in cells]
    found: list[MacroBlock] = []
    while True:
        candidates = []
        for mask, kind in ((null_mask, MacroKind.ALL_NULL), (nonnull_mask, MacroKind.ALL_NONNULL)):
            rect = _largest_uniform_rectangle(rows, cols, mask)
            if rect is not None and rect[0] >= min_cells:
                candidates.append((rect[0], rect[1], rect[2], kind))
        if not candidates:
            break
        # largest first; ties prefer the earliest corner (kinds cannot tie there)
        candidates.sort(key=lambda c: (-c[0], c[1], c[3].value))
        _, lo, hi, kind = candidates[0]
        found.append(MacroBlock(Range(lo, hi), kind))
        for i in range(lo[0] - 1, hi[0]):
            base = i * cols
            for j in range(lo[1] - 1, hi[1]):
                null_mask[base + j] = False
                nonnull_mask[base + j] = False
    return found


def _detect_generic(cube: Datacube, min_cells: int) -> list[MacroBlock]:
    """Greedy fallback for arities other than 2: grow a box from every
    unclaimed cell (trying both axis orders), claim the largest each round."""
    dims = cube.dims
    ndim = cube.ndim
    cells = cube.cells
    claimed = bytearray(len(cells))

    strides = [1] * ndim
    for q in range(ndim - 2, -1, -1):
        strides[q] = strides[q + 1] * dims[q + 1]

    def offset(coords: Sequence[int]) -> int:
        return sum((c - 1) * st for c, st in zip(coords, strides))

    def usable(off: int, cls: int) -> bool:
        return not claimed[off] and (cells[off] > 0) == cls

    def grow(anchor: Coords, order: Sequence[int]) -> tuple[int, Coords, Coords]:
        cls = cells[offset(anchor)] > 0
        lo = list(anchor)
        hi = list(anchor)
        changed = True
        while changed:
            changed = False
            for q in order:
                if hi[q] + 1 > dims[q]:
                    continue
                slab_lo = lo.copy()
                slab_hi = hi.copy()
                slab_lo[q] = slab_hi[q] = hi[q] + 1
                slab = Range(tuple(slab_lo), tuple(slab_hi))
                if all(usable(offset(c), cls) for c in slab.cells()):
                    hi[q] += 1
                    changed = True
        size = 1
        for l, h in zip(lo, hi):
            size *= h - l + 1
        return size, tuple(lo), tuple(hi)

    found: list[MacroBlock] = []
    orders = (tuple(range(ndim)), tuple(reversed(range(ndim))))
    while True:
        best: tuple[int, Coords, Coords] | None = None
        for anchor in cube.full_range().cells():
            if claimed[offset(anchor)]:
                continue
            for order in orders:
                size, lo, hi = grow(anchor, order)
                if size >= min_cells and (best is None or size > best[0]):
                    best = (size, lo, hi)
        if best is None:
            break
        _, lo, hi = best
        box = Range(lo, hi)
        kind = MacroKind.ALL_NONNULL if cells[offset(lo)] > 0 else MacroKind.ALL_NULL
        for coords in box.cells():
            claimed[offset(coords)] = 1
        found.append(MacroBlock(box, kind))
    return found


def detect_macroblocks(cube: Datacube, min_cells: int = 20) -> ConstraintSet:
    """Extract disjoint uniform macro-blocks of at least ``min_cells`` cells.

    Greedy largest-first: each round finds the largest axis-aligned box of
    unclaimed cells that is uniformly null or uniformly non-null, claims it,
    and repeats until no box reaches ``min_cells``.  Two-dimensional cubes
    use an exact largest-rectangle search per round; other arities fall back
    to greedy box growth.  The result is deterministic and always consistent
    with the cube.
    """
    if min_cells < 1:
        raise ConstraintError(f"min_cells must be >= 1, got {min_cells}")
    if cube.ndim == 2:
        found = _detect_2d(cube, min_cells)
    else:
        found = _detect_generic(cube, min_cells)
    return ConstraintSet(tuple(found))


# ---------------------------------------------------------------------------
# JSON persistence.
# ---------------------------------------------------------------------------


def constraints_to_dict(cs: ConstraintSet) -> dict:
    return {
        "macro_blocks": [
            {"lo": list(m.range.lo), "hi": list(m.range.hi), "kind": m.kind.value}
            for m in cs.blocks
        ]
    }


def constraints_from_dict(payload: dict) -> ConstraintSet:
    blocks = tuple(
        MacroBlock(Range(tuple(raw["lo"]), tuple(raw["hi"])), MacroKind(raw["kind"]))
        for raw in payload.get("macro_blocks", [])
    )
    return ConstraintSet(blocks)


def save_constraints(cs: ConstraintSet, path: str) -> None:
    with open(path, "w") as handle:
        json.dump(constraints_to_dict(cs), handle)


def load_constraints(path: str) -> ConstraintSet:
    with open(path) as handle:
        payload = json.load(handle)
    try:
        return constraints_from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConstraintError(f"malformed constraints file {path}: {exc}")
