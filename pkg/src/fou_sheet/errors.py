"""Exception types shared across the package."""

from __future__ import annotations


class FouSheetError(Exception):
    """Base class for every error raised on purpose by this package."""


class NonFiniteInput(FouSheetError, ValueError):
    pass


class DomainError(FouSheetError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class SeriesRangeError(DomainError):
    """The power series was asked for an argument beyond its stable range."""


class RegimeError(DomainError):
    """Hurst parameters outside the range required by the asymptotic results."""


class FactorizationFailure(FouSheetError, ArithmeticError):
    pass


class MaxIterExceeded(FouSheetError, ArithmeticError):
    pass


class GridMismatch(FouSheetError, ValueError):
    pass


class DimensionMismatch(FouSheetError, ValueError):
    pass


class DenominatorZero(FouSheetError, ZeroDivisionError):
    pass


class ZeroVariance(FouSheetError, ZeroDivisionError):
    pass


class InsufficientSamples(FouSheetError, ValueError):
    pass


class ParseError(FouSheetError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(FouSheetError, ValueError):
    """Carries every violated constraint, not only the first one."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.errors))


class ExperimentError(FouSheetError, RuntimeError):
    """A module error wrapped with the experiment it happened in."""
