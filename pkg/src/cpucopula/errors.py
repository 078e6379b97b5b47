"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`CopulaError`.
The CLI maps each category onto an exit code.
"""


class CopulaError(Exception):
    """Base class for all library errors."""


class DomainError(CopulaError, ValueError):
    """An argument lies outside the domain of a function."""


class SpecError(CopulaError, ValueError):
    """A driver or run configuration is invalid."""


class NotPSDError(DomainError):
    """A matrix has an eigenvalue below the PSD tolerance."""


class DegenerateColumnError(DomainError):
    """A data column is constant, so ranks or correlations are undefined."""


class EvaluationError(CopulaError, ArithmeticError):
    """A numerical evaluation under- or overflowed."""


class QuadratureError(CopulaError, ArithmeticError):
    """Adaptive quadrature hit its panel limit before reaching tolerance.

    Attributes
    ----------
    estimate : float
        Best integral estimate at the time of failure.
    error : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ParseError(CopulaError, ValueError):
    """Malformed CSV input; ``row``/``column`` are 1-based when known."""

    def __init__(self, message, row=None, column=None):
        location = ""
        if row is not None:
            location = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + location)
        self.row = row
        self.column = column
