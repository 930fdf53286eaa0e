"""Exception types shared across the package."""


class CoopnetError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(CoopnetError):
    """A configuration value is missing, out of range, or inconsistent."""


class InvalidInputError(CoopnetError):
    """An operation received arguments violating its preconditions."""


class SamplingExhaustedError(CoopnetError):
    """Weighted sampling has no eligible candidate left."""


class StructuralError(CoopnetError):
    """The graph cannot accommodate the requested modification."""


class NonStationaryError(CoopnetError):
    """The stationarity criterion was not met within the window budget."""
