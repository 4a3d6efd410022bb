"""Exception hierarchy shared by the library and the command-line tool."""


class CWEError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CWEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataParseError(CWEError):
    """An input dataset file could not be parsed or validated."""


class NumericalError(CWEError, ArithmeticError):
    """A numerical procedure failed (non-convergence, degenerate data, ...)."""


class GridTooCoarseError(NumericalError):
    """A parameter grid does not resolve the alpha curve well enough."""
