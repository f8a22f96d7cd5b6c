"""Exception hierarchy shared by the subpackages."""

from __future__ import annotations


class AlcSelfError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AlcSelfError, ValueError):
    """Input does not satisfy a structural contract.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class BudgetExceeded(AlcSelfError, RuntimeError):
    """A search ran past its configured resource budget."""


class ParseError(AlcSelfError, ValueError):
    """Text could not be parsed; carries a 1-based line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
