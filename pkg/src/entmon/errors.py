"""Exception hierarchy shared by all entmon modules."""


class EntmonError(Exception):
    """Base class for every error raised by entmon."""


class ValidationError(EntmonError, ValueError):
    """Malformed or out-of-contract input."""


class DomainError(EntmonError, ValueError):
    """Input is well formed but lies outside the domain of the operation."""


class SingularConfigurationError(DomainError):
    """A quantity that must be nonzero vanished (e.g. a gradient component)."""


class BranchPointError(DomainError):
    """The implicit function is not locally single valued at this point."""


class UnsupportedInputError(EntmonError, ValueError):
    """Input is valid mathematically but beyond the supported range."""


class ConfigurationError(EntmonError):
    """A run cannot be set up as requested (bad path, failed guard)."""


class TrackingError(EntmonError, RuntimeError):
    """Numerical continuation failed."""


class NearSingularityError(TrackingError):
    """Adaptive step size underflowed close to a singular point."""


class InconsistentLiftError(TrackingError):
    """Logarithm lifts do not describe a closed image curve."""


class InternalConsistencyError(EntmonError, AssertionError):
    """A self-check that must hold by construction failed."""
