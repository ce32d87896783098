"""MiniLang: the toy target language.

Lexer, parser, static checker (the "compiler"), deterministic interpreter
with a step budget (the "test runner"), and canonical pretty-printer.
All operations are pure functions of their inputs.
"""

from rrlab.minilang import ast
from rrlab.minilang.checker import analyze, check
from rrlab.minilang.diagnostics import Category, Diagnostic, LangError, Span
from rrlab.minilang.fragment import (
    HOLE_MARKER,
    canonicalize_fragment,
    fragment_tokens,
    hunk_text,
    join_tokens,
    splice,
)
from rrlab.minilang.compile import CompiledProgram, compile_program, interpret
from rrlab.minilang.interp import (
    DEFAULT_STEP_BUDGET,
    ExecOutcome,
    InterpreterError,
    OutcomeKind,
    RuntimeFault,
    interpret_reference,
)
from rrlab.minilang.lexer import Token, TokenKind, lex, normalize_source
from rrlab.minilang.parser import parse, parse_source
from rrlab.minilang.render import render

__all__ = [
    "ast",
    "analyze",
    "check",
    "Category",
    "Diagnostic",
    "LangError",
    "Span",
    "HOLE_MARKER",
    "canonicalize_fragment",
    "fragment_tokens",
    "hunk_text",
    "join_tokens",
    "splice",
    "DEFAULT_STEP_BUDGET",
    "CompiledProgram",
    "compile_program",
    "ExecOutcome",
    "InterpreterError",
    "OutcomeKind",
    "RuntimeFault",
    "interpret",
    "interpret_reference",
    "Token",
    "TokenKind",
    "lex",
    "normalize_source",
    "parse",
    "parse_source",
    "render",
]
