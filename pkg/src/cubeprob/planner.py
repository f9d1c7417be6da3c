"""Range-query answering over a summary: exact blocks plus per-block estimates.

A query range decomposes into blocks it totally contains (answered exactly
from the stored aggregates) and blocks it only partially overlaps (answered
by the single-block estimators).  Means add by linearity; variances add
because blocks are treated as statistically independent; the worst-case error
bound is composed additively, which is exact whenever the per-block extremes
are simultaneously achievable and conservative otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .constraints import ConstraintSet, bound_tuple, validate
from .core import Range
from .errors import ConstraintError
from .estimators import (
    BlockAggregates,
    Estimate,
    Pmf,
    count_case1,
    count_case2,
    count_case3,
    sum_case1,
    sum_case2,
    sum_case3,
)
from .summary import CompressedDatacube, decompose


class QueryKind(Enum):
    COUNT = "count"
    SUM = "sum"


@dataclass(frozen=True)
class QuerySpec:
    """What to estimate: a range, count or sum, and the estimation case."""

    range: Range
    kind: QueryKind
    case: int = 2
    want_pmf: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", QueryKind(self.kind))
        if self.case not in (1, 2, 3):
            raise ValueError(f"estimation case must be 1, 2 or 3, got {self.case}")


def estimate(
    summary: CompressedDatacube,
    constraints: ConstraintSet | None,
    spec: QuerySpec,
) -> Estimate:
    """Estimate a count/sum query against the summary.

    The pmf is attached only when at most one block is partially covered, in
    which case the totally-contained blocks contribute a constant shift of
    its support.
    """
    if spec.case == 3:
        if constraints is None:
            raise ConstraintError("case 3 needs a constraint set (use case 2 without one)")
        report = validate(constraints, summary)
        if not report.ok:
            raise ConstraintError(f"constraints contradict the summary: {report.message}")

    deco = decompose(summary, spec.range)
    is_count = spec.kind is QueryKind.COUNT
    exact_shift = sum(
        (summary.block(k).count if is_count else summary.block(k).sum)
        for k in deco.total
    )

    if not deco.partial:
        pmf = Pmf.point(exact_shift) if spec.want_pmf else None
        return Estimate(Fraction(exact_shift), Fraction(0), Fraction(0), pmf)

    want_block_pmf = spec.want_pmf and len(deco.partial) == 1
    mean = Fraction(exact_shift)
    variance = Fraction(0)
    max_error = Fraction(0)
    pmf: Pmf | None = None
    for index, clip in deco.partial:
        blk = summary.block(index)
        b_in = clip.size
        if spec.case == 3:
            bt = bound_tuple(constraints, blk.range, clip)
            if is_count:
                part = count_case3(bt, blk.count, want_block_pmf)
            else:
                part = sum_case3(bt, blk.count, blk.sum, want_block_pmf)
        else:
            agg = BlockAggregates(blk.size, blk.count, blk.sum, b_in)
            if spec.case == 1:
                part = count_case1(agg, want_block_pmf) if is_count else sum_case1(agg, want_block_pmf)
            else:
                part = count_case2(agg, want_block_pmf) if is_count else sum_case2(agg, want_block_pmf)
        mean += part.mean
        variance += part.variance
        max_error += part.max_error
        if want_block_pmf and part.pmf is not None:
            pmf = part.pmf.shifted(exact_shift)
    return Estimate(mean, variance, max_error, pmf)
