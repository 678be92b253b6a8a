"""Exception and warning types shared across the package.

The three base exceptions map onto the CLI exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class ConfigError(Exception):
    """Invalid run configuration (bad flag combination, unknown spec id, ...)."""


class DataError(Exception):
    """Unusable input data (missing file, non-numeric target, zero variance, ...)."""


class NumericalError(Exception):
    """A numerical routine failed in a way the caller cannot recover from."""


class ZeroVarianceError(DataError):
    """A feature or target has (near-)zero variance where variance is required."""


class RankDeficiencyError(NumericalError):
    """A least-squares system is rank deficient; the caller should switch to ridge."""


class EigenSolveError(NumericalError):
    """The dense symmetric eigensolver failed to converge."""


class RankDeficiencyWarning(UserWarning):
    """A Gram matrix was singular and a thresholded pseudo-inverse was used."""
