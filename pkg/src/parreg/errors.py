"""Exception hierarchy shared by all modules."""


class ParregError(Exception):
    """Base class for every error raised by this package."""


class NotSymmetric(ParregError):
    """A matrix argument is not symmetric within tolerance."""


class NotPSD(ParregError):
    """A matrix argument has an eigenvalue below the negative tolerance.

    When raised while scanning a coefficient path, ``t`` records the
    offending time.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class SingularCovariance(ParregError):
    """A positive definite covariance parameter was required but not given."""


class DimensionMismatch(ParregError):
    """Operands live in different dimensions."""


class ReversedInterval(ParregError):
    """An integration interval was passed with its endpoints swapped."""


class GridTooSmall(ParregError):
    """The periodic box cannot hold the data support plus the required padding."""


class GridMismatch(ParregError):
    """Two fields were combined but live on different grids."""


class AxisOutOfRange(ParregError):
    """A spatial axis index is outside 1..d."""


class BadPartition(ParregError):
    """A time partition is empty, not increasing, or does not span its interval."""


class Indefinite(ParregError):
    """A matrix square root was requested for an indefinite matrix."""


class HypothesisViolated(ParregError):
    """The drift matrix does not leave the non-degenerate block invariant."""


class SupportEscape(ParregError):
    """A frame change would move the field support outside the padded box."""


class BadProfile(ParregError):
    """A time profile with non-positive integral was supplied."""


class BadExponent(ParregError):
    """An L^p exponent outside (1, infinity) was supplied."""


class NotCertified(ParregError):
    """An estimate was requested without a positive parabolicity certificate."""


class ConfigInvalid(ParregError):
    """A CLI configuration document failed validation."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


class IoFailure(ParregError):
    """A report or field file could not be written."""
