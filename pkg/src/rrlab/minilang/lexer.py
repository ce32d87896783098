"""MiniLang lexer.

Tokens carry exact [start, end) character spans into the normalized source,
so diagnostics and AST nodes can always point back into the program text.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from rrlab.minilang.diagnostics import Category, Diagnostic, LangError, Span

KEYWORDS = frozenset(
    ["fn", "let", "if", "else", "while", "return", "true", "false", "and", "or", "not", "int", "bool"]
)

# Longest-match first: two-char operators before their one-char prefixes.
TWO_CHAR_OPS = ("<=", ">=", "==", "!=", "->")
ONE_CHAR_OPS = "+-*/%<>=(){};:,"


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    INT = "int"
    OP = "op"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Span


def normalize_source(text: str) -> str:
    """Canonicalize raw text: CRLF/CR become LF, tabs become single spaces."""
    return text.replace("\r\n", "\n").replace("\r", "\n").replace("\t", " ")


def lex(source: str) -> list[Token]:
    """Tokenize normalized source. Raises LangError(SyntaxError) on alien characters."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c in " \n":
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, Span(i, j)))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token(TokenKind.INT, source[i:j], Span(i, j)))
            i = j
            continue
        two = source[i : i + 2]
        if two in TWO_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, two, Span(i, i + 2)))
            i += 2
            continue
        if c in ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, c, Span(i, i + 1)))
            i += 1
            continue
        raise LangError(
            Diagnostic(Category.SYNTAX_ERROR, Span(i, i + 1), f"illegal character {c!r}")
        )
    return tokens
