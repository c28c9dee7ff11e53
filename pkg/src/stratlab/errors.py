"""Exception types raised across the package."""


class StratlabError(Exception):
    """Base class for every error raised by stratlab."""


class InvalidDimension(StratlabError, ValueError):
    pass


class InvalidScale(StratlabError, ValueError):
    pass


class InvalidIndex(StratlabError, IndexError):
    pass


class InvalidGroup(StratlabError, ValueError):
    pass


class InvalidField(StratlabError, ValueError):
    pass


class UnsupportedExponent(StratlabError, ValueError):
    pass


class InvalidExponent(StratlabError, ValueError):
    pass


class ExcludedExponent(StratlabError, ValueError):
    """Raised when p equals the first-stratum dimension in the Poincare constant."""


class InvalidRadius(StratlabError, ValueError):
    pass


class DomainError(StratlabError, ValueError):
    pass


class HypothesisViolation(StratlabError, ValueError):
    pass


class InsufficientData(StratlabError, ValueError):
    pass


class InvalidPairing(StratlabError, ValueError):
    pass


class NumericFailure(StratlabError, ArithmeticError):
    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class NoConvergence(StratlabError, ArithmeticError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(StratlabError, ValueError):
    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key
