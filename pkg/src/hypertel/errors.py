"""Exception types shared across the package.

The CLI maps every exception below to exit status 2 (bad input), while the
solvers signal "no solution at the requested point" through return values,
never through exceptions.
"""

from __future__ import annotations


class HypertelError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HypertelError, ValueError):
    """Malformed text input (term files, operator files, expressions).

    Carries the 1-based line and column of the offending token when known.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.col = col


class StructuralError(HypertelError, ValueError):
    """Input is well-formed but violates a structural requirement,
    for example a Gamma argument with a negative or fractional n-coefficient,
    or a denominator with a factor that is not integer-linear."""


class NotShiftReducedError(StructuralError):
    """The rational input still contains k-shift-equivalent denominator
    factors that cannot be absorbed into an n-shift orbit, so the summand
    is not Abramov-reduced."""


class PreconditionError(HypertelError, ValueError):
    """A documented precondition of an operation was violated,
    for example requesting a degree plan with r < nu."""


class ExactDivisionError(HypertelError, ArithmeticError):
    """An exact polynomial division left a nonzero remainder."""
