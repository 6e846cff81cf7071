"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class TexrandError(Exception):
    exit_code = 1


class InvalidParameterError(TexrandError, ValueError):
    exit_code = 4


class ShapeError(TexrandError, ValueError):
    exit_code = 4


class DegenerateError(TexrandError, ValueError):
    """Raised when a statistic needed for normalization is zero or undefined."""

    exit_code = 4


class InsufficientPoolError(TexrandError):
    exit_code = 4


class ImageIOError(TexrandError, OSError):
    exit_code = 3


class WeightsFormatError(TexrandError):
    exit_code = 3


class NumericalError(TexrandError, ArithmeticError):
    exit_code = 5
