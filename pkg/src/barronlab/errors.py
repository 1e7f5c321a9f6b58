"""Exception types shared across the package."""


class BarronLabError(Exception):
    """Base class for all errors raised by barronlab."""


class InvalidParameterError(BarronLabError, ValueError):
    """A parameter is out of its admissible range (non-finite, wrong shape, bad p...)."""


class UnsupportedTargetError(BarronLabError):
    """The target function lacks the data an operation needs."""


class RangeError(BarronLabError, ValueError):
    """A function's range does not satisfy a construction's precondition."""


class DivergenceError(BarronLabError, ArithmeticError):
    """An integration or recursion produced non-finite values."""


class ConfigError(BarronLabError, ValueError):
    """A study configuration or serialized document is malformed."""


class FitError(BarronLabError, ValueError):
    """A log-log rate fit received unusable data."""


class StudyAborted(BarronLabError):
    """Too many trials of a study failed."""
