"""Exception types shared across the package.

Every error raised on a contract violation derives from DrivescapeError so the
command line layer can map internal failures to a single exit code.
"""


class DrivescapeError(Exception):
    """Base class for all package-specific failures."""


class ShapeError(DrivescapeError, ValueError):
    """Operands have incompatible shapes for the requested operation."""


class RankError(DrivescapeError, ValueError):
    """An operand has the wrong number of dimensions."""


class DegenerateNormalizationError(DrivescapeError, ValueError):
    """Normalization was requested over fewer than two elements."""


class SchemaError(DrivescapeError, ValueError):
    """Serialized data does not match the expected schema."""


class ValidationError(DrivescapeError, ValueError):
    """A value violates a documented invariant."""


class AlignmentError(DrivescapeError, ValueError):
    """Condition timestamps cannot be aligned to the frame grid."""


class ConfigError(DrivescapeError, ValueError):
    """A configuration file or value is invalid."""


class CheckpointError(DrivescapeError, ValueError):
    """A checkpoint file is missing, truncated, or inconsistent."""


class BatchConstructionError(DrivescapeError, ValueError):
    """A training batch cannot be assembled from the available data."""


class InferenceError(DrivescapeError, RuntimeError):
    """Multi-view generation failed part way through."""
