"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Two vectors (or a vector and a matrix row) have different lengths."""


class InvalidSpec(ValueError):
    """A configuration object has inconsistent or out-of-range fields."""


class DomainError(ValueError):
    """An operation was evaluated outside its mathematical domain."""


class NegativeInput(ValueError):
    """A nonnegative-only measure received a negative component."""


class NoConvergence(RuntimeError):
    """The eigensolver did not reach the requested tolerance."""


class EmptyAssignment(ValueError):
    """A point was given an empty cluster set."""


class InsufficientData(ValueError):
    """Fewer data points than requested clusters."""


class ParseError(ValueError):
    """A CSV cell could not be parsed; carries row/column location."""

    def __init__(self, message, row=None, column=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.column = column


class RaggedRows(ValueError):
    """CSV rows do not all have the same number of cells."""


class EmptyFile(ValueError):
    """The input file contains no data."""
