"""Probabilistic count/sum range queries over block-compressed datacubes."""

from .constraints import (
    BoundTuple,
    ConstraintSet,
    MacroBlock,
    MacroKind,
    bound_tuple,
    detect_macroblocks,
    lb_eq0,
    lb_gt0,
    validate,
)
from .core import Datacube, Range, count_exact, from_relation, sum_exact
from .errors import (
    ConstraintError,
    CubeError,
    DuplicateKeyError,
    FactorError,
    InfeasibleError,
    OutOfBoundsError,
    PmfBudgetError,
    PopulationError,
    RelationFormatError,
)
from .estimators import (
    BlockAggregates,
    Estimate,
    JointPmf,
    Pmf,
    binom,
    compositions_count,
    count_case1,
    count_case2,
    count_case3,
    joint_case2,
    joint_case3,
    n_config_count,
    q_config_count,
    sum_case1,
    sum_case2,
    sum_case3,
)
from .histogram import Bucket, BucketBias, BucketQuery, biased_estimate, cva_estimate
from .oracle import (
    PopulationSpec,
    StatKind,
    enumerate_population,
    population_stats,
    two_block_population_stats,
)
from .planner import QueryKind, QuerySpec, estimate
from .summary import (
    BlockSummary,
    CompressedDatacube,
    CompressionFactor,
    RangeDecomposition,
    build_summary,
    decompose,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
