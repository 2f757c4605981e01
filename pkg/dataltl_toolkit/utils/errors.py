from __future__ import annotations

from typing import Any


class DataLTLError(Exception):
    """Base class for every error raised by the toolkit.

    The CLI maps any subclass to exit code 3 (input error) and renders
    ``details`` in ``--json`` mode.
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def as_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.details}


class WordFormatError(DataLTLError):
    """Malformed word JSON, undeclared symbols, or a word of the wrong shape."""


class FormulaSyntaxError(DataLTLError):
    """Formula text that does not parse; carries the offending location."""

    def __init__(self, message: str, text: str = "", line: int | None = None, column: int | None = None):
        super().__init__(message, {"line": line, "column": column})
        self.text = text
        self.line = line
        self.column = column


class UnknownSymbolError(FormulaSyntaxError):
    """Proposition or attribute outside a supplied alphabet."""


class PositionOutOfRangeError(DataLTLError):
    def __init__(self, position: int, length: int):
        super().__init__(
            f"position {position} outside [1, {length}]", {"position": position, "length": length}
        )
        self.position = position
        self.length = length


class FragmentError(DataLTLError):
    """A formula outside the fragment an operation accepts."""


class TranslationError(FragmentError):
    """The multi-attribute translation has no exact clause for this shape."""


class EncodingError(DataLTLError):
    """Attribute outside the scheme, reserved-name clash or broken block structure."""


class ValidityError(DataLTLError):
    """Extended word or decoration that does not meet a checker's preconditions."""


class AutomatonError(DataLTLError):
    """Malformed automaton definition or incompatible automata."""


class SearchBudgetExceeded(DataLTLError):
    """The bounded search ran out of its node budget before finishing.

    Never a verdict: callers must report it separately from bounded-unsat.
    """

    def __init__(self, budget: int, explored: int):
        super().__init__(
            f"search budget of {budget} nodes exhausted", {"budget": budget, "explored": explored}
        )
        self.budget = budget
        self.explored = explored


class GadgetError(DataLTLError):
    """Bad PCP solution indices, even-length solutions, or malformed machines and runs."""
