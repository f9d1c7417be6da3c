"""Single-block distributions for count and sum range queries.

Every estimator answers the same question: a block of ``b`` cells is known
only through aggregates (and possibly integrity constraints), a query covers
``b_in`` of its cells, and the answer inside the query is a random variable
over all datacubes compatible with that knowledge.  Three nested levels of
knowledge are supported:

* case 1 -- count queries use the block's non-null count ``t`` alone
  (hypergeometric placements); sum queries use the block sum ``s`` alone
  (stars-and-bars compositions).
* case 2 -- ``t`` and ``s`` jointly.  The count distribution collapses to
  case 1; the sum distribution tightens.
* case 3 -- ``t``, ``s`` plus lower/upper bounds on non-null counts derived
  from integrity constraints (a :class:`~cubeprob.constraints.BoundTuple`).
  With trivial bounds this reduces exactly to case 2.

All probabilities, means, variances and maximum-error bounds are exact
rationals over arbitrary-precision integers; float views are provided at the
boundary.  Requesting an exact pmf is refused above a size budget
(``DEFAULT_PMF_BUDGET``) -- moments are always available in closed form, and
the ``*_pmf_float`` helpers offer a log-space floating fallback for the
single-variable distributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, exp, lgamma, sqrt
from typing import Mapping

from .constraints import BoundTuple
from .errors import InfeasibleError, PmfBudgetError

DEFAULT_PMF_BUDGET = 10_000

_ZERO = Fraction(0)


# ---------------------------------------------------------------------------
# Combinatorics kernel.
# ---------------------------------------------------------------------------


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k); zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def compositions_count(cells: int, total: int) -> int:
    """Number of length-``cells`` vectors of naturals (>= 0) summing to ``total``.

    Equals C(cells + total - 1, total); the empty vector counts once for
    total 0 and never otherwise.
    """
    if cells < 0 or total < 0:
        return 0
    if cells == 0:
        return 1 if total == 0 else 0
    return binom(cells + total - 1, total)


def q_config_count(x: int, y: int, z: int) -> int:
    """Vectors of length x with exactly y non-null naturals summing to z.

    Choose the y non-null positions, then compose z into y positive parts:
    C(x, y) * C(z - 1, z - y).
    """
    if x < 0 or y < 0 or z < 0:
        return 0
    if y == 0:
        return 1 if z == 0 else 0
    if z < y or y > x:
        return 0
    return binom(x, y) * binom(z - 1, z - y)


def n_config_count(t_hi: int, t: int, s: int, t_lo: int) -> int:
    """Configurations of t_hi free-or-fixed slots holding t non-nulls with sum s.

    ``t_lo`` of the non-nulls sit at known positions, so only t - t_lo
    placements among t_hi - t_lo free slots remain:
    C(t_hi - t_lo, t - t_lo) * C(s - 1, s - t).  Infeasible demands (more
    non-nulls than slots or than located ones allow, sum below the count,
    positive sum with no non-nulls) count zero.
    """
    if not 0 <= t_lo <= t_hi:
        raise ValueError(f"located count {t_lo} outside [0..{t_hi}]")
    if t < t_lo or s < 0:
        return 0
    if t > t_hi or t > s:
        return 0
    if t == 0:
        return 1 if s == 0 else 0
    return binom(t_hi - t_lo, t - t_lo) * binom(s - 1, s - t)


def _log_binom(n: int, k: int) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


# ---------------------------------------------------------------------------
# Distribution containers.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pmf:
    """Exact probability mass function over integer values."""

    support: tuple[tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(v), Fraction(p)) for v, p in self.support)
        object.__setattr__(self, "support", entries)
        if not entries:
            raise ValueError("a pmf needs at least one support point")
        values = [v for v, _ in entries]
        if any(a >= b for a, b in zip(values, values[1:])):
            raise ValueError("pmf support values must strictly increase")
        if any(p <= 0 for _, p in entries):
            raise ValueError("pmf probabilities must be positive")
        if sum(p for _, p in entries) != 1:
            raise ValueError("pmf probabilities must sum to exactly 1")

    @classmethod
    def from_weights(
        cls, weights: Mapping[int, int], denominator: int | None = None
    ) -> "Pmf":
        total = sum(weights.values()) if denominator is None else denominator
        if total <= 0:
            raise InfeasibleError("empty distribution: no compatible configuration")
        entries = tuple(
            (v, Fraction(w, total)) for v, w in sorted(weights.items()) if w
        )
        return cls(entries)

    @classmethod
    def point(cls, value: int) -> "Pmf":
        return cls(((value, Fraction(1)),))

    def prob(self, value: int) -> Fraction:
        for v, p in self.support:
            if v == value:
                return p
        return _ZERO

    def mean(self) -> Fraction:
        return sum((p * v for v, p in self.support), _ZERO)

    def variance(self) -> Fraction:
        mu = self.mean()
        return sum((p * v * v for v, p in self.support), _ZERO) - mu * mu

    def min_value(self) -> int:
        return self.support[0][0]

    def max_value(self) -> int:
        return self.support[-1][0]

    def shifted(self, delta: int) -> "Pmf":
        return Pmf(tuple((v + delta, p) for v, p in self.support))


@dataclass(frozen=True)
class JointPmf:
    """Exact joint distribution of (count, sum) inside a query range."""

    support: tuple[tuple[tuple[int, int], Fraction], ...]

    def __post_init__(self) -> None:
        entries = tuple(
            ((int(t), int(s)), Fraction(p)) for (t, s), p in self.support
        )
        object.__setattr__(self, "support", entries)
        if not entries:
            raise ValueError("a joint pmf needs at least one support point")
        keys = [k for k, _ in entries]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("joint pmf support must strictly increase")
        if any(p <= 0 for _, p in entries):
            raise ValueError("joint pmf probabilities must be positive")
        if sum(p for _, p in entries) != 1:
            raise ValueError("joint pmf probabilities must sum to exactly 1")

    @classmethod
    def from_weights(
        cls, weights: Mapping[tuple[int, int], int], denominator: int | None = None
    ) -> "JointPmf":
        total = sum(weights.values()) if denominator is None else denominator
        if total <= 0:
            raise InfeasibleError("empty distribution: no compatible configuration")
        entries = tuple(
            (k, Fraction(w, total)) for k, w in sorted(weights.items()) if w
        )
        return cls(entries)

    def marginal_count(self) -> Pmf:
        acc: dict[int, Fraction] = {}
        for (t_in, _), p in self.support:
            acc[t_in] = acc.get(t_in, _ZERO) + p
        return Pmf(tuple(sorted(acc.items())))

    def marginal_sum(self) -> Pmf:
        acc: dict[int, Fraction] = {}
        for (_, s_in), p in self.support:
            acc[s_in] = acc.get(s_in, _ZERO) + p
        return Pmf(tuple(sorted(acc.items())))

    def prob(self, t_in: int, s_in: int) -> Fraction:
        for key, p in self.support:
            if key == (t_in, s_in):
                return p
        return _ZERO


@dataclass(frozen=True)
class Estimate:
    """Mean, variance and a worst-case error bound; optionally the full pmf.

    ``max_error`` is exact (a rational): it equals the largest possible
    |true answer - mean| over the compatible population, and is attained by
    some member of it.
    """

    mean: Fraction
    variance: Fraction
    max_error: Fraction
    pmf: Pmf | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", Fraction(self.mean))
        object.__setattr__(self, "variance", Fraction(self.variance))
        object.__setattr__(self, "max_error", Fraction(self.max_error))
        if self.variance < 0:
            raise ValueError(f"negative variance {self.variance}")
        if self.max_error < 0:
            raise ValueError(f"negative max error {self.max_error}")
        if self.pmf is not None and not (
            self.pmf.min_value() <= self.mean <= self.pmf.max_value()
        ):
            raise ValueError(f"mean {self.mean} outside the pmf support range")

    @property
    def mean_float(self) -> float:
        return float(self.mean)

    @property
    def variance_float(self) -> float:
        return float(self.variance)

    @property
    def stddev(self) -> float:
        return sqrt(float(self.variance))


@dataclass(frozen=True)
class BlockAggregates:
    """Aggregates of one block plus the size of the query range inside it."""

    b: int
    t: int
    s: int
    b_in: int

    def __post_init__(self) -> None:
        if self.b < 1:
            raise InfeasibleError(f"block size {self.b} must be >= 1")
        if not 0 <= self.t <= self.b:
            raise InfeasibleError(f"count {self.t} outside [0..{self.b}]")
        if self.t > self.s:
            raise InfeasibleError(f"count {self.t} exceeds sum {self.s}")
        if self.t == 0 and self.s > 0:
            raise InfeasibleError(f"sum {self.s} positive with no non-null cells")
        if not 1 <= self.b_in < self.b:
            raise InfeasibleError(
                f"query size {self.b_in} must satisfy 1 <= b_in < b (b={self.b}); "
                "full-block queries are exact and belong to the planner"
            )


def _check_pmf_budget(b: int, s: int, budget: int | None) -> None:
    if budget is not None and (b > budget or s > budget):
        raise PmfBudgetError(
            f"exact pmf refused for b={b}, s={s} (budget {budget}); "
            "use the closed-form moments or a *_pmf_float helper"
        )


# ---------------------------------------------------------------------------
# Case 1: count via t alone, sum via s alone.
# ---------------------------------------------------------------------------


def count_case1(
    agg: BlockAggregates, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Count query knowing only the block's non-null count.

    The count inside the query follows the hypergeometric law of drawing
    ``b_in`` of ``b`` cells when ``t`` are non-null:

        P(count = k) = C(b_in, k) * C(b - b_in, t - k) / C(b, t)

    with mean (b_in/b)*t and variance t*(b-t)*b_in*(b-b_in) / (b^2*(b-1)).
    """
    b, t, b_in = agg.b, agg.t, agg.b_in
    mean = Fraction(b_in * t, b)
    variance = Fraction(t * (b - t) * b_in * (b - b_in), b * b * (b - 1))
    lo = max(0, t - (b - b_in))
    hi = min(t, b_in)
    max_error = max(mean - lo, hi - mean)
    pmf = None
    if want_pmf:
        _check_pmf_budget(b, agg.s, pmf_budget)
        denom = binom(b, t)
        weights = {
            k: binom(b_in, k) * binom(b - b_in, t - k) for k in range(lo, hi + 1)
        }
        pmf = Pmf.from_weights(weights, denom)
    return Estimate(mean, variance, max_error, pmf)


def sum_case1(
    agg: BlockAggregates, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Sum query knowing only the block's total sum.

    Compatible blocks are the compositions of ``s`` over ``b`` natural-valued
    cells, so the query sum has

        P(sum = v) = C(b_in+v-1, v) * C(b-b_in+s-v-1, s-v) / C(b+s-1, s)

    with mean (b_in/b)*s and variance b_in*s*(b-b_in)*(b+s) / (b^2*(b+1)).
    The answer can be anything from 0 to s, so the worst-case error is
    max(mean, s - mean).
    """
    b, s, b_in = agg.b, agg.s, agg.b_in
    mean = Fraction(b_in * s, b)
    variance = Fraction(b_in * s * (b - b_in) * (b + s), b * b * (b + 1))
    max_error = max(mean, s - mean)
    pmf = None
    if want_pmf:
        _check_pmf_budget(b, s, pmf_budget)
        denom = compositions_count(b, s)
        weights = {
            v: compositions_count(b_in, v) * compositions_count(b - b_in, s - v)
            for v in range(0, s + 1)
        }
        pmf = Pmf.from_weights(weights, denom)
    return Estimate(mean, variance, max_error, pmf)


# ---------------------------------------------------------------------------
# Case 2: t and s jointly.
# ---------------------------------------------------------------------------


def joint_case2(
    agg: BlockAggregates, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> JointPmf:
    """Joint law of (count, sum) inside the query given both t and s:

        P(count = k, sum = v) =
            Q(b_in, k, v) * Q(b - b_in, t - k, s - v) / Q(b, t, s)

    where Q is :func:`q_config_count`.
    """
    b, t, s, b_in = agg.b, agg.t, agg.s, agg.b_in
    _check_pmf_budget(b, s, pmf_budget)
    denom = q_config_count(b, t, s)
    if denom == 0:
        raise InfeasibleError(f"no block of size {b} holds {t} non-nulls summing {s}")
    weights: dict[tuple[int, int], int] = {}
    for k in range(0, min(b_in, t) + 1):
        t_out = t - k
        for v in range(k, s - t_out + 1):
            w = q_config_count(b_in, k, v) * q_config_count(b - b_in, t_out, s - v)
            if w:
                weights[(k, v)] = w
    return JointPmf.from_weights(weights, denom)


def count_case2(
    agg: BlockAggregates, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Count query knowing t and s: identical in law to :func:`count_case1`.

    Knowing the block sum adds nothing about where non-nulls sit, so the
    distribution, moments and the error bound coincide with case 1.
    """
    return count_case1(agg, want_pmf, pmf_budget=pmf_budget)


def sum_case2(
    agg: BlockAggregates, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Sum query knowing both t and s.

    Mean is (b_in/b)*s as in case 1 but the variance tightens to

        s*b_in*(b-b_in) / (b^2*(b-1)*(t+1)) * [b*(2s - t + 1) - s*(t + 1)].

    The extremes sharpen too: at least max(0, t-(b-b_in)) non-nulls must sit
    inside the query (each worth >= 1) and at least max(0, t-b_in) outside.
    """
    b, t, s, b_in = agg.b, agg.t, agg.s, agg.b_in
    mean = Fraction(b_in * s, b)
    variance = Fraction(
        s * b_in * (b - b_in) * (b * (2 * s - t + 1) - s * (t + 1)),
        b * b * (b - 1) * (t + 1),
    )
    lo = max(0, t - (b - b_in))
    hi = s - max(0, t - b_in)
    max_error = max(mean - lo, hi - mean)
    pmf = None
    if want_pmf:
        pmf = joint_case2(agg, pmf_budget=pmf_budget).marginal_sum()
    return Estimate(mean, variance, max_error, pmf)


# ---------------------------------------------------------------------------
# Case 3: t, s and integrity-constraint bounds.
# ---------------------------------------------------------------------------


def _check_case3_inputs(bt: BoundTuple, t: int, s: int | None = None) -> None:
    if not bt.t_lo_blk <= t <= bt.t_hi_blk:
        raise InfeasibleError(
            f"block count {t} violates constraint bounds [{bt.t_lo_blk}..{bt.t_hi_blk}]"
        )
    if s is not None:
        if t > s:
            raise InfeasibleError(f"count {t} exceeds sum {s}")
        if t == 0 and s > 0:
            raise InfeasibleError(f"sum {s} positive with no non-null cells")


def joint_case3(
    bt: BoundTuple, t: int, s: int, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> JointPmf:
    """Joint law of (count, sum) inside the query under constraint bounds.

    With N = :func:`n_config_count` and the complement region carrying
    t - count non-nulls and sum s - v:

        P(count = k, sum = v) =
            N(t_hi_in, k, v, t_lo_in) * N(t_hi_out, t-k, s-v, t_lo_out)
            / N(t_hi_blk, t, s, t_lo_blk)

    Trivial bounds reduce this exactly to :func:`joint_case2`.
    """
    _check_case3_inputs(bt, t, s)
    _check_pmf_budget(bt.b_blk, s, pmf_budget)
    tu_in, tl_in = bt.t_hi_in, bt.t_lo_in
    tu_out, tl_out = bt.t_hi_out, bt.t_lo_out
    denom = n_config_count(bt.t_hi_blk, t, s, bt.t_lo_blk)
    if denom == 0:
        raise InfeasibleError(
            f"constraints contradict aggregates: no configuration with t={t}, s={s} under {bt}"
        )
    weights: dict[tuple[int, int], int] = {}
    k_lo = max(tl_in, t - tu_out, 0)
    k_hi = min(tu_in, t - tl_out, t)
    for k in range(k_lo, k_hi + 1):
        t_out = t - k
        for v in range(k, s - t_out + 1):
            w = n_config_count(tu_in, k, v, tl_in) * n_config_count(
                tu_out, t_out, s - v, tl_out
            )
            if w:
                weights[(k, v)] = w
    return JointPmf.from_weights(weights, denom)


def count_case3(
    bt: BoundTuple, t: int, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Count query under constraint bounds.

    Removing the located cells leaves a hypergeometric draw in shifted
    coordinates: with l = t_hi_in - t_lo_in free query slots out of
    n = t_hi_blk - t_lo_blk free block slots and m = t - t_lo_blk free
    non-nulls,

        P(count = t_lo_in + h) = C(l, h) * C(n - l, m - h) / C(n, m).

    When every cell is located (n = 0) the count is exactly t_lo_in; the
    variance is 0 whenever n <= 1.
    """
    _check_case3_inputs(bt, t)
    tl_in, tu_in = bt.t_lo_in, bt.t_hi_in
    l = tu_in - tl_in
    n = bt.t_hi_blk - bt.t_lo_blk
    m = t - bt.t_lo_blk
    if n == 0:
        mean = Fraction(tl_in)
        variance = _ZERO
    else:
        mean = tl_in + Fraction(l * m, n)
        if n <= 1:
            variance = _ZERO
        else:
            variance = Fraction(l * m * (n - l) * (bt.t_hi_blk - t), n * n * (n - 1))
    lo = max(tl_in, t - bt.t_hi_out)
    hi = min(tu_in, t - bt.t_lo_out)
    max_error = max(mean - lo, hi - mean)
    pmf = None
    if want_pmf:
        _check_pmf_budget(bt.b_blk, 0, pmf_budget)
        denom = binom(n, m)
        weights = {
            tl_in + h: binom(l, h) * binom(n - l, m - h)
            for h in range(max(0, m - (n - l)), min(l, m) + 1)
        }
        pmf = Pmf.from_weights(weights, denom)
    return Estimate(mean, variance, max_error, pmf)


def sum_case3(
    bt: BoundTuple, t: int, s: int, want_pmf: bool = False, *, pmf_budget: int | None = DEFAULT_PMF_BUDGET
) -> Estimate:
    """Sum query under constraint bounds.

    With l, n, m as in :func:`count_case3` and the moment helpers
    alpha = s*(s+1)/(t*(t+1)), beta = s*(s-t)/(t*(t+1)):

        mean = t_lo_in*(s/t) + l*(s/t)*(m/n)          (t_lo_in*(s/t) when n = 0)

        variance =
          alpha*l*(m/n)*[1 + (l-1)*(m-1)/(n-1)]
            + (beta + 2*alpha*t_lo_in)*l*(m/n)
            + alpha*t_lo_in^2 + beta*t_lo_in - mean^2          if n > 1
          s*t_lo_in*(t-t_lo_in)*(s-t)/(t^2*(t+1))              if n = 0, or n = 1 with t at the lower bound
          s*t_hi_in*(t-t_hi_in)*(s-t)/(t^2*(t+1))              if n = 1 with t at the upper bound

    The degenerate branches cover the configurations where the count inside
    the query is already pinned down and only the value split varies.
    """
    _check_case3_inputs(bt, t, s)
    if t == 0:
        pmf = Pmf.point(0) if want_pmf else None
        return Estimate(_ZERO, _ZERO, _ZERO, pmf)
    tl_in, tu_in = bt.t_lo_in, bt.t_hi_in
    l = tu_in - tl_in
    n = bt.t_hi_blk - bt.t_lo_blk
    m = t - bt.t_lo_blk
    s_over_t = Fraction(s, t)
    if n == 0:
        mean = tl_in * s_over_t
    else:
        mean = tl_in * s_over_t + l * s_over_t * Fraction(m, n)
    if n > 1:
        alpha = Fraction(s * (s + 1), t * (t + 1))
        beta = Fraction(s * (s - t), t * (t + 1))
        occupancy = Fraction(m, n)
        variance = (
            alpha * l * occupancy * (1 + (l - 1) * Fraction(m - 1, n - 1))
            + (beta + 2 * alpha * tl_in) * l * occupancy
            + alpha * tl_in * tl_in
            + beta * tl_in
            - mean * mean
        )
    elif n == 0 or t == bt.t_lo_blk:
        variance = Fraction(s * tl_in * (t - tl_in) * (s - t), t * t * (t + 1))
    else:  # n == 1 and t == bt.t_hi_blk
        variance = Fraction(s * tu_in * (t - tu_in) * (s - t), t * t * (t + 1))
    # Extremes of the achievable sum.  Generally the minimum sum puts the
    # fewest possible non-nulls inside (each worth 1) and the maximum leaves
    # the fewest outside; but when the count inside is pinned to t (every
    # non-null inside) the sum is constantly s, and when pinned to 0 it is
    # constantly 0 -- without these corners the bound would not be attained.
    count_lo = max(tl_in, t - bt.t_hi_out)
    count_hi = min(tu_in, t - bt.t_lo_out)
    lo = s if count_lo == t else count_lo
    hi = 0 if count_hi == 0 else s - (t - count_hi)
    max_error = max(mean - lo, hi - mean)
    pmf = None
    if want_pmf:
        pmf = joint_case3(bt, t, s, pmf_budget=pmf_budget).marginal_sum()
    return Estimate(mean, variance, max_error, pmf)


# ---------------------------------------------------------------------------
# Log-space floating fallbacks for large single-variable pmfs.
# ---------------------------------------------------------------------------


def count_case1_pmf_float(agg: BlockAggregates) -> tuple[tuple[int, float], ...]:
    """Hypergeometric pmf of case-1 counts as floats, computed in log space."""
    b, t, b_in = agg.b, agg.t, agg.b_in
    log_denom = _log_binom(b, t)
    out = []
    for k in range(max(0, t - (b - b_in)), min(t, b_in) + 1):
        log_w = _log_binom(b_in, k) + _log_binom(b - b_in, t - k)
        out.append((k, exp(log_w - log_denom)))
    return tuple(out)


def sum_case1_pmf_float(agg: BlockAggregates) -> tuple[tuple[int, float], ...]:
    """Stars-and-bars pmf of case-1 sums as floats, computed in log space."""
    b, s, b_in = agg.b, agg.s, agg.b_in
    log_denom = _log_binom(b + s - 1, s)
    out = []
    for v in range(0, s + 1):
        log_w = _log_binom(b_in + v - 1, v) + _log_binom(b - b_in + s - v - 1, s - v)
        out.append((v, exp(log_w - log_denom)))
    return tuple(out)


def count_case3_pmf_float(bt: BoundTuple, t: int) -> tuple[tuple[int, float], ...]:
    """Shifted hypergeometric pmf of case-3 counts as floats."""
    _check_case3_inputs(bt, t)
    tl_in = bt.t_lo_in
    l = bt.t_hi_in - tl_in
    n = bt.t_hi_blk - bt.t_lo_blk
    m = t - bt.t_lo_blk
    if n == 0:
        return ((tl_in, 1.0),)
    log_denom = _log_binom(n, m)
    out = []
    for h in range(max(0, m - (n - l)), min(l, m) + 1):
        log_w = _log_binom(l, h) + _log_binom(n - l, m - h)
        out.append((tl_in + h, exp(log_w - log_denom)))
    return tuple(out)
