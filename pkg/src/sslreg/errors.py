"""Exception taxonomy.

Three failure families matter to callers: bad configuration (exit 1 at the
command line), bad input data (exit 2), and numerical trouble during
estimation (exit 3). Everything raised by this package derives from
SslregError so scripts can catch one base class.
"""


class SslregError(Exception):
    """Base class for all errors raised by sslreg."""


class ConfigError(SslregError):
    """Invalid configuration: unknown option value, malformed grid file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class DataError(SslregError):
    """Problems with user-supplied data."""


class SchemaError(DataError):
    """A required column is missing or the header is malformed."""


class ParseError(DataError):
    """A cell could not be read as a finite real number."""


class EmptyDataError(DataError):
    """No labeled rows were found."""


class NumericalError(SslregError):
    """Estimation failed for numerical reasons."""


class RankDeficiencyError(NumericalError):
    """Design or moment matrix is numerically singular."""


class UnderDeterminedError(NumericalError):
    """Too few rows for the number of coefficients requested."""


class DegenerateRegressorError(NumericalError):
    """An adjusted regressor has (numerically) zero mean square."""


class DegenerateRiskError(NumericalError):
    """Risk-ratio denominator is not positive."""


class EstimationError(NumericalError):
    """A per-coordinate auxiliary regression failed; names the coordinate."""


class ContractError(SslregError):
    """Caller violated an interface contract (shape or provenance mismatch)."""
