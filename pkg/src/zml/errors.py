"""Exception types raised across the package."""


class ZmlError(Exception):
    """Base class for all package errors."""


# spectral core / operators
class SymmetryViolation(ZmlError, ValueError):
    pass


class InvalidExponent(ZmlError, ValueError):
    pass


class NegativeTime(ZmlError, ValueError):
    pass


class NonPositiveTime(ZmlError, ValueError):
    pass


class OrderTooHigh(ZmlError, ValueError):
    pass


class InvalidBeta(ZmlError, ValueError):
    pass


class NonZeroMass(ZmlError, ValueError):
    pass


class GridMismatch(ZmlError, ValueError):
    pass


# initial data
class WidthTooLarge(ZmlError, ValueError):
    pass


class SupportTooLarge(ZmlError, ValueError):
    pass


class InconsistentShells(ZmlError, ValueError):
    pass


# evolution
class Blowup(ZmlError, RuntimeError):
    """Sup norm of the solution crossed the configured threshold."""

    def __init__(self, t, linf, threshold):
        self.t = t
        self.linf = linf
        self.threshold = threshold
        super().__init__(f"blowup at t={t:.6g}: |u|_inf={linf:.6g} > {threshold:.6g}")


class NoContraction(ZmlError, RuntimeError):
    """Picard iteration failed to contract (data too large)."""

    def __init__(self, message, ratios=()):
        self.ratios = list(ratios)
        super().__init__(message)


# oracles
class DenominatorBreach(ZmlError, RuntimeError):
    pass


class UnsupportedKind(ZmlError, ValueError):
    pass


# analysis
class WindowTooNarrow(ZmlError, ValueError):
    pass


# config / cli
class ParseError(ZmlError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ParseError):
    pass


class MissingRequired(ParseError):
    pass
