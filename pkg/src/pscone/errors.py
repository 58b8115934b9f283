"""Exception hierarchy shared by the library and the command line."""


class PseudoConeError(Exception):
    """Base class for every error raised by :mod:`pscone`."""

    exit_code = 1


class ValidationError(PseudoConeError, ValueError):
    """An input violates a structural invariant (cone, facet list, measure)."""

    exit_code = 3


class DomainError(PseudoConeError, ValueError):
    """A point lies outside the domain where an operation is defined."""

    exit_code = 4


class GridError(PseudoConeError):
    """A quadrature grid could not be built (e.g. no node survived filtering)."""

    exit_code = 5
