"""Exception types shared across the package."""


class TailmixError(Exception):
    """Base class for all tailmix errors."""


class ParameterError(TailmixError, ValueError):
    """A distribution or model parameter is outside its domain."""


class DataError(TailmixError, ValueError):
    """Input data violates a precondition (nonpositive, too few, NaN...)."""


class DegenerateSupportError(TailmixError):
    """Both mixture components assign zero density to some observation."""


class EmptyComponentError(TailmixError):
    """A mixture component received (numerically) zero total weight."""


class InitializationError(TailmixError):
    """Starting values could not be computed from the data."""


class EstimationError(TailmixError):
    """Numerical maximum-likelihood estimation failed on every start."""


class BootstrapError(TailmixError):
    """Too many bootstrap replicates failed to refit."""


class EnvelopeError(TailmixError):
    """Accept-reject envelope degenerated (acceptance rate too low)."""


class NumericalError(TailmixError):
    """A quadrature or root-finding step did not converge."""
