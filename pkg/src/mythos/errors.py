"""Exception hierarchy shared by all mythos modules."""

from __future__ import annotations

from dataclasses import dataclass


class MythosError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class SourceSpan:
    """Location of a parsed statement (1-based line and column)."""

    line: int
    column: int
    length: int = 1

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class LocatedSyntaxError(MythosError, ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class KRSSSyntaxError(LocatedSyntaxError):
    """Malformed KRSS input."""


class NTriplesSyntaxError(LocatedSyntaxError):
    """Malformed N-Triples input."""


class KnowledgeBaseError(MythosError, ValueError):
    """Structurally invalid knowledge base (role cycles, inverse clashes)."""


class ResourceLimitError(MythosError):
    """A configured node or inference cap was exceeded."""

    def __init__(self, message: str, limit: int):
        super().__init__(message)
        self.limit = limit


class UnknownIndividualError(MythosError, KeyError):
    def __str__(self) -> str:
        return f"unknown individual: {self.args[0]}"


class PreconditionError(MythosError, ValueError):
    """An operation was called on input that violates its precondition."""


class UnsafeRuleError(MythosError, ValueError):
    """A rule head uses a variable that the body never binds."""


class FixtureMissingError(MythosError, LookupError):
    def __init__(self, text: str, available: list[str]):
        listing = "\n  ".join(available) if available else "(none)"
        super().__init__(f"no recorded translation for {text!r}; available:\n  {listing}")
        self.text = text
        self.available = available


class TranslationError(MythosError):
    """The live text-to-RDF service failed."""
