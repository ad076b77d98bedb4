"""
Exo-Mix - Error Taxonomy

Every error raised by the package derives from ExoMixError. The three
families map onto CLI exit codes (config / data / estimation).
"""


class ExoMixError(Exception):
    """Base error for the package."""
    exit_code = 1


# Configuration -------------------------------------------------------------

class ConfigError(ExoMixError, ValueError):
    """Invalid user-supplied configuration."""
    exit_code = 2


class InvalidParameterError(ConfigError):
    """A single parameter is outside its valid range."""


class InvalidOptionsError(ConfigError):
    """FitOptions (or another option bundle) failed validation."""


# Data ----------------------------------------------------------------------

class DataError(ExoMixError, ValueError):
    """Input data could not be read or failed validation."""
    exit_code = 3


class SchemaMismatchError(DataError):
    def __init__(self, column, available=None):
        self.column = column
        self.available = [] if available is None else [str(c) for c in available]
        msg = f"Missing column '{column}'"
        if self.available:
            msg += f" (available: {', '.join(self.available)})"
        super().__init__(msg)


class DuplicateKeyError(DataError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"Duplicate key {key}")


class ParseError(DataError):
    def __init__(self, column, line_numbers):
        self.column = column
        self.line_numbers = list(line_numbers)
        shown = ', '.join(str(n) for n in self.line_numbers[:10])
        more = '' if len(self.line_numbers) <= 10 else f' (+{len(self.line_numbers) - 10} more)'
        super().__init__(f"Unparseable values in column '{column}' at lines {shown}{more}")


class DataValidationError(DataError):
    """Parsed values violate a domain constraint (e.g. non-positive price)."""


class LengthMismatchError(DataError):
    """Two aligned vectors differ in length."""


class ExcessiveMissingnessError(DataError):
    """Too many store-weeks lack data for estimation."""


class EmptyResultError(DataError):
    """A filter left nothing to work with."""


# Estimation ----------------------------------------------------------------

class EstimationError(ExoMixError):
    """Estimation could not proceed on the given data."""
    exit_code = 4


class DegenerateSampleError(EstimationError, ValueError):
    """Sample has zero spread."""


class InvalidBandwidthError(EstimationError, ValueError):
    """Bandwidth must be strictly positive."""


class DegenerateWeightsError(EstimationError, ValueError):
    """Weights sum to zero or contain invalid values."""


class AmbiguousLabelingError(EstimationError):
    """Two components tie on the labeling statistic."""


class EmptySelectionError(EstimationError):
    """No observation reaches the posterior threshold."""


class DegenerateRegressorError(EstimationError):
    """Regressor has zero variance."""


class InsufficientDataError(EstimationError):
    """Fewer observations than parameters."""


class CollinearFixedEffectsError(EstimationError):
    """Fixed effects absorb all variation of the regressor."""


class TooManyFailedReplicatesError(EstimationError):
    def __init__(self, failed, total, limit):
        self.failed = failed
        self.total = total
        self.limit = limit
        super().__init__(
            f"{failed} of {total} bootstrap replicates failed (limit {limit:.0%})"
        )


class NoQualifyingWindowError(EstimationError):
    """No Control-then-treatment run of the requested length exists."""


# Replicate failures that the bootstrap tolerates and counts.
RECOVERABLE_REPLICATE_ERRORS = (
    AmbiguousLabelingError,
    EmptySelectionError,
    DegenerateRegressorError,
    InsufficientDataError,
)
