"""Exception hierarchy.

Errors fall into two families so callers (and the CLI) can tell bad input
apart from a numerically degenerate situation:

* :class:`DataError` -- malformed or inconsistent input (CLI exit code 2).
* :class:`DegenerateError` -- a well-formed input for which the requested
  quantity is undefined, e.g. an empty denominator (CLI exit code 3).
"""


class RankCompatError(Exception):
    """Base class for every error raised by this package."""


class DataError(RankCompatError, ValueError):
    pass


class DegenerateError(RankCompatError, ArithmeticError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class InvalidConfig(DataError):
    pass


class SpecTooLarge(DataError):
    pass


class MissingOriginal(DataError):
    pass


class EmptyCandidates(DataError):
    pass


class EmptyInput(DataError):
    pass


class TooFewReplications(DataError):
    pass


class SchemaError(DataError):
    pass


class ParseError(DataError):
    """Malformed file content; carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SingleClass(DegenerateError):
    pass


class OriginalAllWrong(DegenerateError):
    pass


class OriginalNoCorrectPairs(DegenerateError):
    pass


class NoOrderedPairs(DegenerateError):
    pass


class OutOfRegime(DegenerateError):
    pass


class InfeasibleCounts(DegenerateError):
    pass


class NonFiniteScore(DegenerateError):
    pass
