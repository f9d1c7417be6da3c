"""Exception types shared across the package.

Everything derives from CubeError so callers (and the CLI) can distinguish
data/consistency problems from plain usage mistakes.
"""


class CubeError(Exception):
    """Base class for data and consistency errors."""


class OutOfBoundsError(CubeError):
    """A coordinate or range falls outside the cube."""


class DuplicateKeyError(CubeError):
    """Two relation tuples share the same dimension coordinates."""


class RelationFormatError(CubeError):
    """Malformed relation input (CSV parse failure, bad value, ...)."""


class FactorError(CubeError):
    """Invalid compression factor, or factor/cube dimension mismatch."""


class ConstraintError(CubeError):
    """Overlapping macro-blocks, or constraints inconsistent with a summary."""


class InfeasibleError(CubeError):
    """Block aggregates or bound tuples that no datacube can realize."""


class PmfBudgetError(CubeError):
    """An exact probability mass function was requested above the size budget."""


class PopulationError(CubeError):
    """An enumeration population is infinite or exceeds the configured cap."""
