"""Exception types shared across the package."""


class LiseError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(LiseError, ValueError):
    """Malformed arguments: wrong shapes, non-finite entries, wrong usage."""


class NotPositiveDefiniteError(LiseError):
    """A matrix required to be (semi)definite is indefinite beyond tolerance."""


class EstimabilityError(LiseError):
    """A rank precondition needed for unbiased input estimation fails."""


class NumericalError(LiseError):
    """A matrix that should be invertible by model assumptions is singular."""


class GainConstructionError(LiseError):
    """The requested gain parameterization is inadmissible (reduced innovation
    covariance singular)."""


class ConfigError(LiseError):
    """Configuration file is syntactically or semantically invalid."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
