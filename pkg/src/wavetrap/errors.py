class WaveTrapError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WaveTrapError, ValueError):
    """An argument lies outside the domain of the operation (e.g. f <= 0)."""


class BelowCutoffError(WaveTrapError, ValueError):
    """Group delay or propagation requested where the guide does not propagate."""


class ConfigurationError(WaveTrapError, ValueError):
    """A block was built with parameters that violate its invariants."""
