"""Exception hierarchy shared by all modules."""


class StagewiseError(Exception):
    """Base class for every error raised by this package."""


class ZeroColumnError(StagewiseError):
    def __init__(self, column):
        super().__init__(f"column {column} has zero norm after centering")
        self.column = column


class NonFiniteInputError(StagewiseError):
    pass


class ParseError(StagewiseError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column


class MissingResponseColumnError(StagewiseError):
    pass


class DegenerateMatrixError(StagewiseError):
    pass


class EpsilonOutOfRangeError(StagewiseError):
    pass


class GridTooShortError(StagewiseError):
    pass


class ConfigError(StagewiseError):
    pass


class InfeasibleBetaError(StagewiseError):
    pass


class UnboundedBelowError(StagewiseError):
    pass


class MaxItersExceededError(StagewiseError):
    """Raised by iterative oracles; ``best`` carries the best iterate's certificate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
