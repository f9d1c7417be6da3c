"""Acceptance suite.

Each criterion runs as one test and prints a single PASS/FAIL line (visible
with ``pytest -s`` or in captured output).  The exhaustive estimator-vs-
enumeration sweep is computed once and shared by the criteria that consume
different aspects of it.
"""

from __future__ import annotations

import functools
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from cubeprob import (
    BlockAggregates,
    BlockSummary,
    BoundTuple,
    Bucket,
    BucketBias,
    BucketQuery,
    CompressedDatacube,
    CompressionFactor,
    ConstraintSet,
    InfeasibleError,
    MacroBlock,
    MacroKind,
    PopulationSpec,
    QueryKind,
    QuerySpec,
    Range,
    StatKind,
    biased_estimate,
    binom,
    bound_tuple,
    build_summary,
    compositions_count,
    count_case1,
    count_case2,
    count_case3,
    detect_macroblocks,
    enumerate_population,
    estimate,
    joint_case2,
    joint_case3,
    lb_eq0,
    population_stats,
    sum_case1,
    sum_case2,
    sum_case3,
    two_block_population_stats,
)
from cubeprob.cli import run_experiment

from conftest import REFERENCE_BOUNDARIES, make_sparse_cube

F = Fraction


def criterion(number: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            started = time.time()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] criterion {number:2d} FAIL  {title}")
                raise
            print(
                f"[acceptance] criterion {number:2d} PASS  {title} "
                f"({time.time() - started:.1f}s)"
            )
        return wrapper
    return deco


# ---------------------------------------------------------------------------
# Shared exhaustive sweep over 2 <= b <= 6, 0 <= t <= b, t <= s <= 8,
# 1 <= b_in < b, with up to 2 forced-null and 2 forced-non-null positions.
# ---------------------------------------------------------------------------


@dataclass
class SweepResults:
    failures: dict[str, list[str]] = field(default_factory=dict)
    branch_hits: Counter = field(default_factory=Counter)
    case3_checked: int = 0
    case2_checked: int = 0
    case1_count_checked: int = 0
    case1_sum_checked: int = 0

    def fail(self, aspect: str, message: str) -> None:
        bucket = self.failures.setdefault(aspect, [])
        if len(bucket) < 10:
            bucket.append(message)

    def aspect(self, name: str) -> list[str]:
        return self.failures.get(name, [])


def _prepared_vectors(b: int, t: int, s: int):
    """(support mask, prefix counts, prefix sums) per population member."""
    out = []
    for vec in enumerate_population(PopulationSpec(b=b, fix_t=t, fix_s=s)):
        mask = 0
        pc = [0] * (b + 1)
        ps = [0] * (b + 1)
        for i, v in enumerate(vec):
            if v:
                mask |= 1 << i
            pc[i + 1] = pc[i] + (1 if v else 0)
            ps[i + 1] = ps[i] + v
        out.append((mask, pc, ps))
    return out


def _grid():
    for b in range(2, 7):
        for t in range(0, b + 1):
            for s in ([0] if t == 0 else range(t, 9)):
                yield b, t, s


def _constraint_splits(b: int, b_in: int):
    """All placements of <= 2 forced-non-null and <= 2 forced-null cells."""
    for nn_in in range(0, 3):
        for nn_out in range(0, 3 - nn_in):
            for nz_in in range(0, 3):
                for nz_out in range(0, 3 - nz_in):
                    if nn_in + nz_in > b_in or nn_out + nz_out > b - b_in:
                        continue
                    yield nn_in, nn_out, nz_in, nz_out


def _population_moments(weighted: dict, n: int):
    acc1 = 0
    acc2 = 0
    for value, count in weighted.items():
        acc1 += value * count
        acc2 += value * value * count
    mean = F(acc1, n)
    return mean, F(acc2, n) - mean * mean


def _check_error_bound(res, aspect, mean, err, lo, hi):
    """Dominance (every member within) and tightness (some member attains)."""
    if not (mean - err <= lo and hi <= mean + err):
        res.fail(aspect, f"bound {err} violated by population range [{lo}, {hi}] around {mean}")
    if max(mean - lo, hi - mean) != err:
        res.fail(aspect, f"bound {err} not attained: population range [{lo}, {hi}] around {mean}")


def _sweep_case1(res: SweepResults) -> None:
    # count queries: placement populations, no sum involved
    for b in range(2, 7):
        for t in range(0, b + 1):
            placements = list(enumerate_population(PopulationSpec(b=b, fix_t=t)))
            for b_in in range(1, b):
                weights: dict[int, int] = {}
                for vec in placements:
                    k = sum(1 for i in range(b_in) if vec[i])
                    weights[k] = weights.get(k, 0) + 1
                n = len(placements)
                est = count_case1(BlockAggregates(b, t, t, b_in), want_pmf=True)
                expected = {k: F(c, n) for k, c in weights.items()}
                if dict(est.pmf.support) != expected:
                    res.fail("case1_count_pmf", f"b={b} t={t} b_in={b_in}")
                mean, var = _population_moments(weights, n)
                if est.mean != mean or est.variance != var:
                    res.fail("case1_count_moments", f"b={b} t={t} b_in={b_in}")
                _check_error_bound(
                    res, "err_c1", est.mean, est.max_error,
                    min(weights), max(weights),
                )
                res.case1_count_checked += 1
    # sum queries: composition populations, no count involved
    for b in range(2, 7):
        for s in range(0, 9):
            vectors = list(enumerate_population(PopulationSpec(b=b, fix_s=s)))
            for b_in in range(1, b):
                weights = {}
                for vec in vectors:
                    v = sum(vec[:b_in])
                    weights[v] = weights.get(v, 0) + 1
                n = len(vectors)
                est = sum_case1(BlockAggregates(b, 0 if s == 0 else 1, s, b_in), want_pmf=True)
                expected = {v: F(c, n) for v, c in weights.items()}
                if dict(est.pmf.support) != expected:
                    res.fail("case1_sum_pmf", f"b={b} s={s} b_in={b_in}")
                mean, var = _population_moments(weights, n)
                if est.mean != mean:
                    res.fail("case1_sum_moments", f"b={b} s={s} b_in={b_in}")
                if est.variance != var:
                    res.fail("sum_only_variance", f"b={b} s={s} b_in={b_in}")
                _check_error_bound(
                    res, "err_s1", est.mean, est.max_error, min(weights), max(weights)
                )
                res.case1_sum_checked += 1


def _sweep_joint(res: SweepResults) -> None:
    for b, t, s in _grid():
        vectors = _prepared_vectors(b, t, s)
        n_all = len(vectors)
        for b_in in range(1, b):
            agg = BlockAggregates(b, t, s, b_in)
            # --- case 2: trivial constraints --------------------------------
            joint_weights: dict[tuple[int, int], int] = {}
            count_weights: dict[int, int] = {}
            sum_weights: dict[int, int] = {}
            for mask, pc, ps in vectors:
                key = (pc[b_in], ps[b_in])
                joint_weights[key] = joint_weights.get(key, 0) + 1
                count_weights[key[0]] = count_weights.get(key[0], 0) + 1
                sum_weights[key[1]] = sum_weights.get(key[1], 0) + 1
            joint2 = joint_case2(agg)
            expected_joint = {k: F(c, n_all) for k, c in joint_weights.items()}
            if dict(joint2.support) != expected_joint:
                res.fail("case2_joint", f"b={b} t={t} s={s} b_in={b_in}")
            est_c1 = count_case1(agg, want_pmf=True)
            if joint2.marginal_count() != est_c1.pmf:
                res.fail("case2_count_marginal", f"b={b} t={t} s={s} b_in={b_in}")
            cmean, cvar = _population_moments(count_weights, n_all)
            if est_c1.mean != cmean or est_c1.variance != cvar:
                res.fail("case1_count_moments", f"joint pop b={b} t={t} s={s} b_in={b_in}")
            est_s2 = sum_case2(agg, want_pmf=True)
            smean, svar = _population_moments(sum_weights, n_all)
            if est_s2.mean != smean or est_s2.variance != svar:
                res.fail("case2_sum_moments", f"b={b} t={t} s={s} b_in={b_in}")
            if est_s2.pmf != joint2.marginal_sum():
                res.fail("case2_sum_pmf", f"b={b} t={t} s={s} b_in={b_in}")
            if count_case2(agg, want_pmf=True) != est_c1:
                res.fail("reduction_count", f"b={b} t={t} s={s} b_in={b_in}")
            _check_error_bound(
                res, "err_s2", est_s2.mean, est_s2.max_error,
                min(sum_weights), max(sum_weights),
            )
            res.case2_checked += 1

            # --- case 3: forced-position grid -------------------------------
            for nn_in, nn_out, nz_in, nz_out in _constraint_splits(b, b_in):
                bt = BoundTuple(
                    t_lo_in=nn_in,
                    t_hi_in=b_in - nz_in,
                    t_lo_blk=nn_in + nn_out,
                    t_hi_blk=b - nz_in - nz_out,
                    b_in=b_in,
                    b_blk=b,
                )
                nn_mask = (1 << nn_in) - 1
                nn_mask |= ((1 << nn_out) - 1) << b_in
                nz_mask = ((1 << nz_in) - 1) << nn_in
                nz_mask |= ((1 << nz_out) - 1) << (b_in + nn_out)
                filtered = [
                    (pc[b_in], ps[b_in])
                    for mask, pc, ps in vectors
                    if mask & nn_mask == nn_mask and mask & nz_mask == 0
                ]
                feasible = bt.t_lo_blk <= t <= bt.t_hi_blk
                if not filtered:
                    if feasible:
                        res.fail("infeasible_agreement", f"empty but feasible {bt} t={t} s={s}")
                    for fn in (
                        lambda: joint_case3(bt, t, s),
                        lambda: count_case3(bt, t),
                        lambda: sum_case3(bt, t, s),
                    ):
                        try:
                            fn()
                            res.fail("infeasible_agreement", f"no error for {bt} t={t} s={s}")
                        except InfeasibleError:
                            pass
                    continue
                if not feasible:
                    res.fail("infeasible_agreement", f"nonempty but infeasible {bt} t={t} s={s}")
                    continue
                n = len(filtered)
                jw: dict[tuple[int, int], int] = {}
                cw: dict[int, int] = {}
                sw: dict[int, int] = {}
                for key in filtered:
                    jw[key] = jw.get(key, 0) + 1
                    cw[key[0]] = cw.get(key[0], 0) + 1
                    sw[key[1]] = sw.get(key[1], 0) + 1

                joint3 = joint_case3(bt, t, s)
                if dict(joint3.support) != {k: F(c, n) for k, c in jw.items()}:
                    res.fail("case3_joint", f"{bt} t={t} s={s}")
                est_c3 = count_case3(bt, t, want_pmf=True)
                if dict(est_c3.pmf.support) != {k: F(c, n) for k, c in cw.items()}:
                    res.fail("case3_count", f"pmf {bt} t={t} s={s}")
                cmean, cvar = _population_moments(cw, n)
                if est_c3.mean != cmean:
                    res.fail("case3_count", f"mean {bt} t={t} s={s}")
                if est_c3.variance != cvar:
                    res.fail("constrained_count_variance", f"{bt} t={t} s={s}")
                est_s3 = sum_case3(bt, t, s)
                smean, svar = _population_moments(sw, n)
                if est_s3.mean != smean:
                    res.fail("case3_sum_moments", f"mean {bt} t={t} s={s}")
                if est_s3.variance != svar:
                    res.fail("constrained_sum_variance", f"{bt} t={t} s={s}")
                if joint3.marginal_sum() != (
                    sum_case3(bt, t, s, want_pmf=True).pmf
                ):
                    res.fail("case3_sum_pmf", f"{bt} t={t} s={s}")

                span = bt.t_hi_blk - bt.t_lo_blk
                if span > 1:
                    res.branch_hits["wide"] += 1
                elif span == 0:
                    res.branch_hits["pinned"] += 1
                elif t == bt.t_lo_blk:
                    res.branch_hits["one_free_low"] += 1
                else:
                    res.branch_hits["one_free_high"] += 1

                lo_count = max(bt.t_lo_in, t - bt.t_hi_out)
                hi_count = min(bt.t_hi_in, t - bt.t_lo_out)
                if (est_c3.pmf.min_value(), est_c3.pmf.max_value()) != (min(cw), max(cw)):
                    res.fail("support_bounds", f"{bt} t={t} s={s}")
                if not (lo_count <= min(cw) and max(cw) <= hi_count):
                    res.fail("support_bounds", f"window {bt} t={t} s={s}")
                _check_error_bound(res, "err_c3", est_c3.mean, est_c3.max_error, min(cw), max(cw))
                _check_error_bound(res, "err_s3", est_s3.mean, est_s3.max_error, min(sw), max(sw))

                if nn_in == nn_out == nz_in == nz_out == 0:
                    if joint3 != joint2:
                        res.fail("reduction_joint", f"b={b} t={t} s={s} b_in={b_in}")
                if nn_in == nn_out == 0 and t >= 1:
                    remark = F((bt.t_hi_in - bt.t_lo_in) * s, bt.t_hi_blk)
                    if est_s3.mean != remark:
                        res.fail("remark_mean", f"{bt} t={t} s={s}")
                res.case3_checked += 1


def _sweep_position_independence(res: SweepResults) -> None:
    """Moving the query or the forced cells around leaves the law unchanged."""
    b, t, s = 5, 3, 6
    base = population_stats(
        PopulationSpec(b=b, fix_t=t, fix_s=s, forced_nonnull=frozenset({1}),
                       forced_null=frozenset({4}), query_positions=frozenset({1, 2})),
        StatKind.SUM,
    )
    moved = population_stats(
        PopulationSpec(b=b, fix_t=t, fix_s=s, forced_nonnull=frozenset({3}),
                       forced_null=frozenset({5}), query_positions=frozenset({2, 3})),
        StatKind.SUM,
    )
    if base != moved:
        res.fail("position_independence", "forced/query placement changed the law")


_SWEEP: SweepResults | None = None


def sweep() -> SweepResults:
    global _SWEEP
    if _SWEEP is None:
        res = SweepResults()
        _sweep_case1(res)
        _sweep_joint(res)
        _sweep_position_independence(res)
        _SWEEP = res
    return _SWEEP


# ---------------------------------------------------------------------------
# Criteria.
# ---------------------------------------------------------------------------


@criterion(1, "oracle equivalence of every distribution on the full grid")
def test_criterion_1_oracle_equivalence():
    res = sweep()
    for aspect in (
        "case1_count_pmf", "case1_count_moments", "case1_sum_pmf", "case1_sum_moments",
        "case2_joint", "case2_count_marginal", "case2_sum_moments", "case2_sum_pmf",
        "case3_joint", "case3_count", "case3_sum_moments", "case3_sum_pmf",
        "infeasible_agreement", "position_independence",
    ):
        assert not res.aspect(aspect), (aspect, res.aspect(aspect))
    assert res.case1_count_checked == 85
    assert res.case1_sum_checked == 135
    assert res.case2_checked == 435
    assert res.case3_checked > 7000


@criterion(2, "closed-form variances match the oracle, all degenerate branches hit")
def test_criterion_2_variance_formulas():
    res = sweep()
    assert not res.aspect("sum_only_variance"), res.aspect("sum_only_variance")
    assert not res.aspect("constrained_count_variance"), res.aspect("constrained_count_variance")
    assert not res.aspect("constrained_sum_variance"), res.aspect("constrained_sum_variance")
    for branch in ("wide", "pinned", "one_free_low", "one_free_high"):
        assert res.branch_hits[branch] > 0, branch


@criterion(3, "max-error bounds dominate every member and are attained")
def test_criterion_3_max_error_dominance():
    res = sweep()
    for aspect in ("err_c1", "err_s1", "err_s2", "err_c3", "err_s3"):
        assert not res.aspect(aspect), (aspect, res.aspect(aspect))


@criterion(4, "reference cube aggregates and worked bounds reproduce")
def test_criterion_4_reference_values(reference_cube, reference_summary, reference_constraints):
    assert (reference_summary.block((1, 1)).count, reference_summary.block((1, 1)).sum) == (8, 26)
    assert (reference_summary.block((1, 2)).count, reference_summary.block((1, 2)).sum) == (5, 29)

    block = Range((4, 1), (7, 4))
    query = Range((4, 1), (6, 3))
    bt = bound_tuple(reference_constraints, block, query)
    assert (bt.t_lo_in, bt.t_hi_in) == (1, 6)
    t = reference_summary.block((2, 1)).count
    assert t == 7
    constrained = count_case3(bt, t, want_pmf=True)
    assert (constrained.pmf.min_value(), constrained.pmf.max_value()) == (1, 6)
    unconstrained = count_case3(BoundTuple.trivial(query.size, block.size), t, want_pmf=True)
    assert (unconstrained.pmf.min_value(), unconstrained.pmf.max_value()) == (0, 7)


@criterion(5, "standard-deviation shapes: symmetry and monotone behavior")
def test_criterion_5_shape_checks():
    # count spread symmetric in t about b/2 and maximized there (b=1000, b_in=500)
    b, b_in = 1000, 500
    var = {t: count_case1(BlockAggregates(b, t, t, b_in)).variance for t in range(0, b + 1)}
    for t in range(0, b + 1):
        assert var[t] == var[b - t]
        if t != b // 2:
            assert var[t] < var[b // 2]
    # joint sum spread non-increasing in t (b=100, s=1000, b_in=50)
    values = [sum_case2(BlockAggregates(100, t, 1000, 50)).variance for t in range(1, 101)]
    assert all(a >= b2 for a, b2 in zip(values, values[1:]))
    assert values[0] > values[-1]
    # sum-only spread increasing in s (b=100, b_in=50)
    last = F(-1)
    for s in range(0, 1001):
        v = sum_case1(BlockAggregates(100, 0 if s == 0 else 1, s, 50)).variance
        assert v > last
        last = v
    # constrained sum spread non-increasing in the count of located nulls
    # inside the query (b=1000, t=500, b_in=500)
    for s in (600, 1000, 2000):
        prev = None
        for located in range(0, 31):
            bt = BoundTuple(0, 500 - located, 0, 1000 - located, 500, 1000)
            v = sum_case3(bt, 500, s).variance
            if prev is not None:
                assert v <= prev
            prev = v
        first = sum_case3(BoundTuple(0, 500, 0, 1000, 500, 1000), 500, s).variance
        last_v = sum_case3(BoundTuple(0, 470, 0, 970, 500, 1000), 500, s).variance
        assert last_v < first


@criterion(6, "reduction identities across the cases")
def test_criterion_6_reductions():
    res = sweep()
    assert not res.aspect("reduction_joint"), res.aspect("reduction_joint")
    assert not res.aspect("reduction_count"), res.aspect("reduction_count")
    assert not res.aspect("remark_mean"), res.aspect("remark_mean")


@criterion(7, "histogram bias cases equal the constrained estimator and the oracle")
def test_criterion_7_histogram():
    checked = 0
    for b in range(2, 7):
        for bias in (BucketBias.LOW, BucketBias.BOTH):
            t_min = 1 if bias is BucketBias.LOW else 2
            if t_min > b:
                continue
            forced = frozenset({1}) if bias is BucketBias.LOW else frozenset({1, b})
            for t in range(t_min, b + 1):
                for s in range(t, 9):
                    bucket = Bucket(b, t, s, bias)
                    cases = []  # (query, oracle start cell, t_lo_blk, t_lo_in)
                    t_lo_blk = 1 if bias is BucketBias.LOW else 2
                    for b_in in range(1, b):  # covering the low extreme
                        cases.append((BucketQuery(b_in, touches_low=True), 1, t_lo_blk, 1))
                    for b_in in range(1, b):  # starting at cell 2
                        touches_high = b_in + 1 == b
                        if bias is BucketBias.BOTH and touches_high:
                            # covers the high extreme: one located non-null inside
                            cases.append((BucketQuery(b_in, touches_high=True), 2, 2, 1))
                        else:
                            cases.append((BucketQuery(b_in, touches_high=touches_high), 2, t_lo_blk, 0))
                    for query, start, blk_lo, in_lo in cases:
                        est = biased_estimate(bucket, query, want_pmf=True)
                        bt = BoundTuple(in_lo, query.b_in, blk_lo, b, query.b_in, b)
                        assert est == sum_case3(bt, t, s, want_pmf=True)
                        spec = PopulationSpec(
                            b=b, fix_t=t, fix_s=s, forced_nonnull=forced,
                            query_positions=frozenset(range(start, start + query.b_in)),
                        )
                        pmf, mean, variance = population_stats(spec, StatKind.SUM)
                        assert est.mean == mean and est.variance == variance
                        assert est.pmf == pmf
                        checked += 1
    assert checked > 200


@criterion(8, "stars-and-bars convolution and Vandermonde identities")
def test_criterion_8_identities():
    for x in range(0, 9):
        for z in range(0, 9):
            for y in range(0, x + 1):
                lhs = sum(
                    compositions_count(y, k) * compositions_count(x - y, z - k)
                    for k in range(0, z + 1)
                )
                assert lhs == compositions_count(x, z), (x, y, z)
                if 1 <= y <= x - 1:
                    raw = sum(
                        binom(y + k - 1, k) * binom(x - y + z - k - 1, z - k)
                        for k in range(0, z + 1)
                    )
                    assert raw == binom(x + z - 1, z), (x, y, z)
    for x in range(0, 9):
        for y in range(0, 9):
            for k in range(0, 17):
                assert sum(binom(x, i) * binom(y, k - i) for i in range(0, k + 1)) == binom(x + y, k)


@criterion(9, "synthetic-cube coverage experiment: constraints help, count > 0.90")
def test_criterion_9_experiment(sparse_cube):
    cube = sparse_cube
    constraints = detect_macroblocks(cube, min_cells=20)
    total_nulls = sum(1 for v in cube.cells if v == 0)
    located_nulls = sum(
        m.range.size for m in constraints.blocks if m.kind is MacroKind.ALL_NULL
    )
    assert 0.25 <= located_nulls / total_nulls <= 0.60

    shapes = [(12, 12), (16, 16), (25, 15)]
    rows = run_experiment(
        cube, shapes, (20, 10), cases=[1, 3], constraints=constraints, stride=(13, 7)
    )
    frac5 = {(r.block_shape, r.case, r.kind): r.fraction(5) for r in rows}
    for shape in shapes:
        for kind in ("count", "sum"):
            assert frac5[(shape, 3, kind)] >= frac5[(shape, 1, kind)], (shape, kind)
    assert max(frac5[(shape, 3, "count")] for shape in shapes) > F(9, 10)


@criterion(10, "planner composition equals the two-block product oracle")
def test_criterion_10_planner_composition():
    def block_grid(b):
        yield 0, 0
        for t in range(1, b + 1):
            for s in range(t, 6):
                yield t, s

    checked = 0
    for b1 in (2, 3, 4):
        for b2 in (2, 3):
            factor = CompressionFactor(((0, b1, b1 + b2),))
            r1 = factor.block_range((1,))
            r2 = factor.block_range((2,))
            for t1, s1 in block_grid(b1):
                for t2, s2 in block_grid(b2):
                    summary = CompressedDatacube(
                        factor,
                        (BlockSummary((1,), r1, t1, s1), BlockSummary((2,), r2, t2, s2)),
                    )
                    # TB-only: exact answers, no spread
                    est = estimate(summary, None, QuerySpec(r1, QueryKind.SUM, 2))
                    assert (est.mean, est.variance) == (s1, 0)
                    est = estimate(summary, None, QuerySpec(Range((1,), (b1 + b2,)), QueryKind.COUNT, 1))
                    assert (est.mean, est.variance) == (t1 + t2, 0)

                    for q_lo, q_hi in ((2, b1 + 1), (1, b1 + 1), (2, b1 + b2)):
                        query = Range((q_lo,), (q_hi,))
                        cover1 = frozenset(range(q_lo, b1 + 1))
                        cover2 = frozenset(range(1, q_hi - b1 + 1))
                        for case, kind in ((1, "count"), (1, "sum"), (2, "count"), (2, "sum")):
                            spec = QuerySpec(query, QueryKind(kind), case)
                            est = estimate(summary, None, spec)
                            if case == 2 or kind == "count":
                                pop1 = PopulationSpec(b=b1, fix_t=t1, fix_s=s1 if case == 2 else None,
                                                      query_positions=cover1)
                                pop2 = PopulationSpec(b=b2, fix_t=t2, fix_s=s2 if case == 2 else None,
                                                      query_positions=cover2)
                            else:
                                pop1 = PopulationSpec(b=b1, fix_s=s1, query_positions=cover1)
                                pop2 = PopulationSpec(b=b2, fix_s=s2, query_positions=cover2)
                            stat = StatKind(kind)
                            mean, variance = two_block_population_stats([pop1, pop2], stat)
                            assert est.mean == mean, (b1, b2, t1, s1, t2, s2, q_lo, q_hi, case, kind)
                            assert est.variance == variance
                            checked += 1
    assert checked > 1000

    # constrained composition: one located non-null inside the query (block 1)
    # and one located null outside it (block 2)
    factor = CompressionFactor(((0, 3, 6),))
    cs = ConstraintSet((
        MacroBlock(Range((2,), (2,)), MacroKind.ALL_NONNULL),
        MacroBlock(Range((6,), (6,)), MacroKind.ALL_NULL),
    ))
    query = Range((2,), (5,))
    for t1, s1 in ((1, 2), (2, 4), (3, 5)):
        for t2, s2 in ((0, 0), (1, 3), (2, 5)):
            summary = CompressedDatacube(
                factor,
                (
                    BlockSummary((1,), factor.block_range((1,)), t1, s1),
                    BlockSummary((2,), factor.block_range((2,)), t2, s2),
                ),
            )
            for kind in ("count", "sum"):
                est = estimate(summary, cs, QuerySpec(query, QueryKind(kind), 3))
                pop1 = PopulationSpec(b=3, fix_t=t1, fix_s=s1, forced_nonnull=frozenset({2}),
                                      query_positions=frozenset({2, 3}))
                pop2 = PopulationSpec(b=3, fix_t=t2, fix_s=s2, forced_null=frozenset({3}),
                                      query_positions=frozenset({1, 2}))
                mean, variance = two_block_population_stats([pop1, pop2], StatKind(kind))
                assert est.mean == mean and est.variance == variance
