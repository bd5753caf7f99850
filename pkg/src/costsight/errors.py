"""Exception and warning types shared across the package."""


class CostsightError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(CostsightError):
    """Array dimensions or class counts of two operands do not agree."""


class InvalidSize(CostsightError):
    """A requested matrix size is out of range."""


class InvalidScale(CostsightError):
    """A scale factor is negative or non-finite."""


class InvalidProbability(CostsightError):
    """A probability vector violates the simplex invariants beyond repair."""


class EmptyGroup(CostsightError):
    """An answer filter selected zero records."""


class IncompleteCoverage(CostsightError):
    """A mean-log matrix has off-diagonal cells with no contributing answers."""


class UnknownClass(CostsightError):
    """A label id is outside the taxonomy."""


class UnknownInstance(CostsightError):
    """An instance id is not present in the instance raster."""


class InsufficientData(CostsightError):
    """Too few answers for the grouped test (degrees of freedom <= 0)."""


class ZeroWithinVariance(CostsightError):
    """Within-group variance is zero while group means differ; F undefined."""


class InvalidShuffleCount(CostsightError):
    """Bootstrap shuffle count must be a positive integer."""


class DatasetMismatch(CostsightError):
    """Two evaluation datasets do not cover the same images/dimensions."""


class MissingBearing(CostsightError):
    """Bird's-eye plotting requested but instances carry no bearing."""


class InvalidSpec(CostsightError):
    """A fixture specification is out of range."""


class MagicMismatch(CostsightError):
    """A binary file does not start with the expected format magic."""


class TruncatedFile(CostsightError):
    """A binary file is shorter than its header declares."""


class DimensionMismatch(CostsightError):
    """Declared dimensions of a binary file are inconsistent."""


class SchemaViolation(CostsightError):
    """A JSON document does not match the published schema."""


class IncompleteCoverageWarning(UserWarning):
    """Aggregation produced a matrix with empty off-diagonal cells."""


class RenormalizationWarning(UserWarning):
    """Probability vectors drifted off the simplex and were renormalized."""
