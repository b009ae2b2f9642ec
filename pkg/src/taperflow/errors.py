"""Exception hierarchy shared by all taperflow modules."""


class TaperflowError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(TaperflowError, ValueError):
    """Inconsistent or incomplete parameters (bad case/beta pairing, missing inputs)."""


class DomainError(TaperflowError, ValueError):
    """An argument lies outside the domain of a function."""


class EmptyWindowError(TaperflowError, ValueError):
    """The summation window floor(n*t) is empty."""


class DegenerateError(TaperflowError, ValueError):
    """A statistic is undefined for the given input (zero variance, zero denominator)."""


class CapacityError(TaperflowError, MemoryError):
    """A requested computation exceeds the configured size cap."""


class NumericalError(TaperflowError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
