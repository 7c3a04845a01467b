"""Exception hierarchy shared by every module."""


class RidgeletError(Exception):
    """Base class for all package errors."""


class InvalidInput(RidgeletError, ValueError):
    pass


class ConfigError(InvalidInput):
    """A configuration file or command-line value is malformed."""


class DataError(RidgeletError):
    """Problems with user-supplied return data."""


class ParseError(DataError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoEligibleAssets(DataError):
    pass


class NumericalError(RidgeletError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class NotPositiveDefinite(NumericalError):
    pass


class NumericalBreakdown(NumericalError):
    pass


class InfeasibleZVP(NumericalError):
    pass


class InfeasibleProjection(NumericalError):
    pass


class DegenerateFactorCount(NumericalError):
    pass


class OutOfRegime(NumericalError):
    pass


class ConstructionFailed(NumericalError):
    pass


class SolverFailed(NumericalError):
    def __init__(self, message, last_iterate=None, residual=None):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(f"{message} (last iterate={last_iterate!r}, residual={residual!r})")
