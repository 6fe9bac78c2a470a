"""Exception hierarchy.

Every error subclasses :class:`UABayesError` and, where the failure is a bad
argument, also :class:`ValueError` so callers can catch either.
"""


class UABayesError(Exception):
    """Base class for all package errors."""


class InvalidDistributionError(UABayesError, ValueError):
    pass


class InvalidLikelihoodError(UABayesError, ValueError):
    pass


class InvalidTemperError(UABayesError, ValueError):
    pass


class InvalidWeightsError(UABayesError, ValueError):
    pass


class DegenerateScaleError(UABayesError, ValueError):
    pass


class DegeneratePosteriorError(UABayesError, ValueError):
    pass


class EmptyPosteriorError(UABayesError, ValueError):
    pass


class DegenerateMAPError(UABayesError, ValueError):
    """Raised when ``a3 == a1 + a2``.

    The minimizer is then any distribution supported on the weighted MAP set.
    ``argmax_set`` holds the indices of that set when the distributions were
    available to compute it, otherwise ``None``.
    """

    def __init__(self, message, argmax_set=None):
        super().__init__(message)
        self.argmax_set = argmax_set


class NoGainError(UABayesError, ValueError):
    pass


class OracleFailureError(UABayesError, RuntimeError):
    pass


class SingularSystemError(UABayesError, ValueError):
    pass


class NumericalSingularityError(UABayesError, ArithmeticError):
    pass


class ParticleDepletionError(UABayesError, ArithmeticError):
    pass


class ModelCollapseError(UABayesError, ArithmeticError):
    pass


class ShapeError(UABayesError, ValueError):
    pass


class MissingClassError(UABayesError, ValueError):
    pass


class InsufficientDataError(UABayesError, ValueError):
    pass


class EmptyDatasetError(UABayesError, ValueError):
    pass


class DatasetParseError(UABayesError, ValueError):
    """Malformed dataset CSV; ``row`` and ``column`` locate the bad cell (1-based)."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column
