"""Exception hierarchy shared by every module."""


class PerfClassError(Exception):
    """Base class for all library errors."""


class ParameterError(PerfClassError, ValueError):
    """Invalid parameter passed to a constructor or operation."""


class NumericsError(PerfClassError):
    """A numerical routine failed to converge.

    ``estimate`` carries the last value computed before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class BracketError(PerfClassError):
    """No sign change inside the requested root bracket."""


class ModelValidationError(PerfClassError):
    """The game environment violates a modelling assumption."""


class MLRPViolationError(ModelValidationError):
    pass


class CrossingNotFoundError(ModelValidationError):
    pass


class RewardError(ModelValidationError):
    pass


class InfeasibleGapError(PerfClassError):
    """Requested gap exceeds what any threshold rule can produce."""


class ZeroGapError(PerfClassError):
    """Operation undefined for a classifier whose gap is zero."""


class ConfigError(PerfClassError):
    """Malformed run configuration."""
