"""Brute-force enumeration of the datacube populations behind every estimator.

A block is a flat vector of ``b`` natural-valued cells (position never
matters to the statistics, only how many query cells are covered).  A
population fixes some combination of the non-null count ``t``, the sum
``s``, and forced null / non-null positions, and the statistic of interest
is the count or sum over a designated set of query positions.

Enumeration is exhaustive, duplicate-free and lexicographic, and the
empirical distribution is computed by direct accumulation -- independently
of the closed forms it serves to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, product as _iproduct
from math import comb
from typing import Iterable, Iterator, Sequence

from .errors import PopulationError
from .estimators import Pmf

MAX_POPULATION = 10_000_000


class StatKind(Enum):
    COUNT = "count"
    SUM = "sum"


@dataclass(frozen=True)
class PopulationSpec:
    """One block's population: size, fixed aggregates, forced positions, query."""

    b: int
    fix_t: int | None = None
    fix_s: int | None = None
    forced_nonnull: frozenset[int] = frozenset()
    forced_null: frozenset[int] = frozenset()
    query_positions: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "forced_nonnull", frozenset(self.forced_nonnull))
        object.__setattr__(self, "forced_null", frozenset(self.forced_null))
        object.__setattr__(self, "query_positions", frozenset(self.query_positions))
        if self.b < 1:
            raise PopulationError(f"block size {self.b} must be >= 1")
        if self.fix_t is None and self.fix_s is None:
            raise PopulationError("at least one of fix_t / fix_s must be given")
        cells = range(1, self.b + 1)
        for name, positions in (
            ("forced_nonnull", self.forced_nonnull),
            ("forced_null", self.forced_null),
            ("query_positions", self.query_positions),
        ):
            if any(p not in cells for p in positions):
                raise PopulationError(f"{name} {sorted(positions)} outside [1..{self.b}]")
        if self.forced_nonnull & self.forced_null:
            raise PopulationError("a position cannot be forced both null and non-null")


def _positive_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``, lex order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            yield (first,) + rest


def _size_bound(spec: PopulationSpec) -> int:
    """Cheap upper bound on the population size (guard only)."""
    free = spec.b - len(spec.forced_nonnull) - len(spec.forced_null)
    if spec.fix_t is not None and spec.fix_s is not None:
        placements = comb(max(free, 0), max(spec.fix_t - len(spec.forced_nonnull), 0))
        splits = comb(max(spec.fix_s - 1, 0), max(spec.fix_s - spec.fix_t, 0))
        return placements * max(splits, 1)
    if spec.fix_s is not None:
        cells = spec.b - len(spec.forced_null)
        return comb(cells + spec.fix_s - 1, spec.fix_s) if cells else 1
    return comb(max(free, 0), max(spec.fix_t - len(spec.forced_nonnull), 0))


def enumerate_population(spec: PopulationSpec) -> Iterator[tuple[int, ...]]:
    """Yield every compatible block vector exactly once, lexicographically.

    * ``fix_t`` and ``fix_s``: all supports of size t respecting the forced
      positions, each filled with every positive composition of s.
    * ``fix_s`` alone: every natural-valued vector summing to s (forced
      non-null positions hold >= 1, forced null positions hold 0).
    * ``fix_t`` alone: values are unbounded, so only 0/1 placement indicator
      vectors are produced; they determine every count statistic.
    """
    if _size_bound(spec) > MAX_POPULATION:
        raise PopulationError(
            f"population bound {_size_bound(spec)} exceeds cap {MAX_POPULATION}"
        )
    b = spec.b
    if spec.fix_t is not None:
        t = spec.fix_t
        if not 0 <= t <= b:
            return
        if len(spec.forced_nonnull) > t:
            return
        for support in combinations(range(1, b + 1), t):
            chosen = frozenset(support)
            if not spec.forced_nonnull <= chosen or chosen & spec.forced_null:
                continue
            if spec.fix_s is None:
                vec = [0] * b
                for p in support:
                    vec[p - 1] = 1
                yield tuple(vec)
                continue
            for parts in _positive_compositions(spec.fix_s, t):
                vec = [0] * b
                for p, v in zip(support, parts):
                    vec[p - 1] = v
                yield tuple(vec)
        return

    # fix_s alone: compose the sum over all non-forced-null cells.
    s = spec.fix_s
    assert s is not None
    minima = [
        1 if (p in spec.forced_nonnull) else 0
        for p in range(1, b + 1)
    ]
    frozen = [p in spec.forced_null for p in range(1, b + 1)]

    def rec(pos: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if pos == b:
            if remaining == 0:
                yield ()
            return
        if frozen[pos]:
            if minima[pos] == 0:
                for rest in rec(pos + 1, remaining):
                    yield (0,) + rest
            return
        needed_after = sum(minima[pos + 1 :])
        for v in range(minima[pos], remaining - needed_after + 1):
            for rest in rec(pos + 1, remaining - v):
                yield (v,) + rest

    yield from rec(0, s)


def _stat_value(vec: Sequence[int], query: Iterable[int], stat: StatKind) -> int:
    if stat is StatKind.COUNT:
        return sum(1 for p in query if vec[p - 1] > 0)
    return sum(vec[p - 1] for p in query)


def population_stats(
    spec: PopulationSpec, stat: StatKind
) -> tuple[Pmf, Fraction, Fraction]:
    """Exact empirical (pmf, mean, variance) of the statistic over the population."""
    stat = StatKind(stat)
    if stat is StatKind.SUM and spec.fix_s is None:
        raise PopulationError(
            "sum statistics are undefined on the count-only population (values unbounded)"
        )
    query = sorted(spec.query_positions)
    weights: dict[int, int] = {}
    n = 0
    acc1 = 0
    acc2 = 0
    for vec in enumerate_population(spec):
        value = _stat_value(vec, query, stat)
        weights[value] = weights.get(value, 0) + 1
        n += 1
        acc1 += value
        acc2 += value * value
    if n == 0:
        raise PopulationError(f"empty population for {spec}")
    mean = Fraction(acc1, n)
    variance = Fraction(acc2, n) - mean * mean
    return Pmf.from_weights(weights, n), mean, variance


def two_block_population_stats(
    specs: Sequence[PopulationSpec], stat: StatKind
) -> tuple[Fraction, Fraction]:
    """Exact (mean, variance) of the summed statistic over a product population.

    Each block contributes the statistic over its own query positions; the
    population is the Cartesian product of the per-block populations, which is
    enumerated outright (no independence shortcut) so the result can audit
    the planner's additive composition.
    """
    stat = StatKind(stat)
    if not 1 <= len(specs) <= 2:
        raise PopulationError("the product oracle handles one or two blocks")
    per_block = []
    for spec in specs:
        if stat is StatKind.SUM and spec.fix_s is None:
            raise PopulationError(
                "sum statistics are undefined on the count-only population"
            )
        query = sorted(spec.query_positions)
        values = [
            _stat_value(vec, query, stat) for vec in enumerate_population(spec)
        ]
        if not values:
            raise PopulationError(f"empty population for {spec}")
        per_block.append(values)
    n = 0
    acc1 = 0
    acc2 = 0
    for combo in _iproduct(*per_block):
        value = sum(combo)
        n += 1
        acc1 += value
        acc2 += value * value
    mean = Fraction(acc1, n)
    variance = Fraction(acc2, n) - mean * mean
    return mean, variance
