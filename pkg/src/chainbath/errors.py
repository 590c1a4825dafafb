"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Parameters, configuration, or inputs outside an operation's domain."""


class NumericalError(RuntimeError):
    """A numerical routine produced an unusable result."""


class NonPhysicalStateError(NumericalError):
    """Covariance data violates the uncertainty bound beyond tolerance."""
