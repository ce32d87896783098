"""MiniLang abstract syntax.

Nodes compare structurally: spans are carried for diagnostics but excluded
from equality so that parse(render(ast)) == ast holds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from rrlab.minilang.diagnostics import Span

_NOSPAN = Span(0, 0)


class Type(enum.Enum):
    INT = "int"
    BOOL = "bool"


@dataclass(eq=True)
class Node:
    pass


# --- expressions -------------------------------------------------------------


@dataclass
class Expr(Node):
    pass


@dataclass
class IntLit(Expr):
    value: int  # non-negative; negatives are Unary('-', IntLit)
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class BoolLit(Expr):
    value: bool
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Var(Expr):
    name: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Unary(Expr):
    op: str  # '-' or 'not'
    operand: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Binary(Expr):
    op: str  # one of + - * / % < <= > >= == != and or
    left: Expr
    right: Expr
    span: Span = field(default=_NOSPAN, compare=False)


ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("and", "or")


# --- statements --------------------------------------------------------------


@dataclass
class Stmt(Node):
    pass


@dataclass
class Block(Node):
    stmts: list[Stmt]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Let(Stmt):
    name: str
    decl_type: Type
    value: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Assign(Stmt):
    name: str
    value: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class If(Stmt):
    cond: Expr
    then_block: Block
    else_block: Block | None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class While(Stmt):
    cond: Expr
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Return(Stmt):
    value: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Param(Node):
    name: str  # parameters are always int
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Program(Node):
    """Exactly one top-level function: main(params: int...) -> int."""

    params: list[Param]
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)
