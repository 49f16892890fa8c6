"""Exception types shared across the package."""


class SkymatteError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SkymatteError, ValueError):
    """An image or array argument violates a shape/range precondition."""


class InvalidParameterError(SkymatteError, ValueError):
    """A scalar parameter is outside its legal domain."""


class SingularSystemError(SkymatteError, ArithmeticError):
    """A per-pixel linear system has a non-positive pivot."""


class EmptyReferenceError(SkymatteError, ValueError):
    """An operation needs reference pixels (e.g. sky samples) and found none."""


class ConfigError(SkymatteError, ValueError):
    """A config file, LUT, or manifest is malformed."""
