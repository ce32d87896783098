"""Diagnostics emitted by the MiniLang frontend (lexer, parser, static checker)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from rrlab.errors import RRLabError


class Category(enum.Enum):
    """Closed set of diagnostic categories."""

    SYNTAX_ERROR = "SyntaxError"
    UNDEFINED_IDENTIFIER = "UndefinedIdentifier"
    TYPE_MISMATCH = "TypeMismatch"
    MISSING_RETURN = "MissingReturn"
    NOT_A_STATEMENT = "NotAStatement"
    DUPLICATE_DEFINITION = "DuplicateDefinition"


@dataclass(frozen=True)
class Span:
    """Half-open character range [start, end) into a SourceText."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span ({self.start}, {self.end})")


@dataclass(frozen=True)
class Diagnostic:
    category: Category
    span: Span
    message: str

    def format(self, source: str) -> str:
        """Render as ``line:col: Category: message`` against the given source."""
        line = source.count("\n", 0, self.span.start) + 1
        col = self.span.start - (source.rfind("\n", 0, self.span.start) + 1) + 1
        return f"{line}:{col}: {self.category.value}: {self.message}"


class LangError(RRLabError):
    """Raised by lex/parse on the first offending token."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(f"{diagnostic.category.value}: {diagnostic.message}")
        self.diagnostic = diagnostic
