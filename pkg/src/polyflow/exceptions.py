"""Exception types raised across the package."""


class PolyflowError(Exception):
    """Base class for all package errors."""


class InvalidArgument(PolyflowError, ValueError):
    pass


class InvalidField(PolyflowError, ValueError):
    pass


class NotWindingZero(PolyflowError, ValueError):
    pass


class IncompatibleBoundaryData(PolyflowError, ValueError):
    pass


class ParityViolation(PolyflowError, ArithmeticError):
    pass


class StepFailure(PolyflowError, ArithmeticError):
    pass


class InvalidPerturbation(PolyflowError, ValueError):
    pass


class InvalidSeries(PolyflowError, ValueError):
    pass


class ClaimFailure(PolyflowError, AssertionError):
    pass


class ConfigError(PolyflowError, ValueError):
    pass
