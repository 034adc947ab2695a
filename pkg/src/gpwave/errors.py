"""Exception hierarchy shared by all gpwave modules.

Configuration mistakes raise ``ConfigurationError`` (bad parameters, broken
preconditions), while failures of the numerics themselves raise subclasses of
``NumericalError``.  The CLI maps the former to exit code 2 and the latter to
exit code 3.
"""


class GpwaveError(Exception):
    """Base class for all gpwave errors."""


class ConfigurationError(GpwaveError, ValueError):
    """Invalid parameters or violated preconditions."""


class NumericalError(GpwaveError):
    """A computation failed for numerical reasons."""


class ZeroLocalWavenumber(NumericalError):
    """The beta-normalization was requested where the coefficient vanishes."""


class ZeroN(ConfigurationError):
    """The normalization constant must be nonzero."""


class UnsupportedDerivativeOrder(ConfigurationError):
    """A derivative oracle was asked beyond its smoothness cap."""


class OrderTooLarge(ConfigurationError):
    """Partition-based derivative table requested beyond its supported order."""


class MixedAnchors(ConfigurationError):
    """Basis functions anchored at different points were mixed in one matrix."""


class RankDeficient(NumericalError):
    """The local fit matrix dropped below full column rank."""


class BreaklineMisaligned(ConfigurationError):
    """The mesh does not place a cell boundary on the coefficient breakline."""


class PointOutsideMesh(ConfigurationError):
    """A reconstruction point does not lie in any mesh cell."""


class SingularSystem(NumericalError):
    """The assembled system matrix is numerically singular."""


class DegenerateNorm(NumericalError):
    """A relative error was requested against a vanishing reference norm."""


class QOutOfRange(ConfigurationError):
    """The boundary reflection parameter must lie in [0, 1)."""


class OutOfValidatedRange(ConfigurationError):
    """A special-function argument is outside the validated interval."""
