"""Exception types shared across the package."""


class SeannError(Exception):
    """Base class for all package errors."""


class DimensionError(SeannError):
    """Operand shapes or sizes are incompatible."""


class DomainError(SeannError):
    """A value lies outside its required domain (e.g. outside [0, 1])."""


class InvalidArgument(SeannError):
    """An argument violates an operation's precondition."""


class UnsupportedArchitecture(SeannError):
    """The network shape or activation is outside an operation's support."""


class TooLarge(SeannError):
    """The instance is too big for an exhaustive operation."""


class NumericalError(SeannError):
    """A computation produced non-finite or otherwise unusable values."""


class FormatError(SeannError):
    """A file does not conform to its binary or text format."""
