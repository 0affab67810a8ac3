"""Exception hierarchy shared by all modules."""


class UrnOverlapError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(UrnOverlapError, ValueError):
    """A sample or urn does not satisfy its construction invariants."""


class DomainError(UrnOverlapError, ValueError):
    """An argument (usually ``k``) lies outside the range where a quantity is defined."""


class UndefinedVarianceError(UrnOverlapError, ValueError):
    """The leave-one-out jackknife needs at least two x-draws."""


class GuardError(UrnOverlapError, ValueError):
    """An enumeration oracle was asked for a problem larger than its size guard."""


class ParseError(UrnOverlapError, ValueError):
    """Malformed count table. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
