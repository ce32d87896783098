"""Canonical pretty-printer for MiniLang.

One statement per line, two-space indentation, minimal parentheses.
render is the interchange format: corpus files store rendered programs, and
parse(lex(render(ast))) == ast structurally.
"""

from __future__ import annotations

from rrlab.minilang import ast
from rrlab.minilang.fragment import join_tokens

INDENT = "  "

_PREC = {
    "or": 1,
    "and": 2,
    "not": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "==": 4,
    "!=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
    "neg": 7,
    "atom": 8,
}

_CMP_PREC = 4


def _prec(expr: ast.Expr) -> int:
    if isinstance(expr, (ast.IntLit, ast.BoolLit, ast.Var)):
        return _PREC["atom"]
    if isinstance(expr, ast.Unary):
        return _PREC["neg"] if expr.op == "-" else _PREC["not"]
    if isinstance(expr, ast.Binary):
        return _PREC[expr.op]
    raise AssertionError(f"unhandled expression {expr!r}")  # pragma: no cover


def expr_tokens(expr: ast.Expr) -> list[str]:
    """Token sequence for an expression, with minimal parentheses."""
    if isinstance(expr, ast.IntLit):
        return [str(expr.value)]
    if isinstance(expr, ast.BoolLit):
        return ["true" if expr.value else "false"]
    if isinstance(expr, ast.Var):
        return [expr.name]
    if isinstance(expr, ast.Unary):
        here = _prec(expr)
        inner = expr_tokens(expr.operand)
        # 'not' admits operands at its own level (not not x); '-' likewise.
        if _prec(expr.operand) < here:
            inner = ["("] + inner + [")"]
        return [expr.op] + inner
    if isinstance(expr, ast.Binary):
        here = _prec(expr)
        left = expr_tokens(expr.left)
        right = expr_tokens(expr.right)
        # comparisons are non-associative: a cmp operand must be parenthesized
        left_needs = _prec(expr.left) < here or (here == _CMP_PREC and _prec(expr.left) == here)
        right_needs = _prec(expr.right) <= here
        if left_needs:
            left = ["("] + left + [")"]
        if right_needs:
            right = ["("] + right + [")"]
        return left + [expr.op] + right
    raise AssertionError(f"unhandled expression {expr!r}")  # pragma: no cover


def render(program: ast.Program) -> str:
    """Canonical SourceText for a program; ends with exactly one newline."""
    lines: list[str] = []
    header: list[str] = ["fn", "main", "("]
    for i, param in enumerate(program.params):
        if i:
            header.append(",")
        header.extend([param.name, ":", "int"])
    header.extend([")", "->", "int", "{"])
    lines.append(join_tokens(header))
    _render_block(program.body, 1, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _render_block(block: ast.Block, depth: int, lines: list[str]) -> None:
    for stmt in block.stmts:
        _render_stmt(stmt, depth, lines)


def _render_stmt(stmt: ast.Stmt, depth: int, lines: list[str]) -> None:
    pad = INDENT * depth
    if isinstance(stmt, ast.Let):
        tokens = ["let", stmt.name, ":", stmt.decl_type.value, "="] + expr_tokens(stmt.value) + [";"]
        lines.append(pad + join_tokens(tokens))
    elif isinstance(stmt, ast.Assign):
        tokens = [stmt.name, "="] + expr_tokens(stmt.value) + [";"]
        lines.append(pad + join_tokens(tokens))
    elif isinstance(stmt, ast.Return):
        tokens = ["return"] + expr_tokens(stmt.value) + [";"]
        lines.append(pad + join_tokens(tokens))
    elif isinstance(stmt, ast.If):
        lines.append(pad + join_tokens(["if"] + expr_tokens(stmt.cond) + ["{"]))
        _render_block(stmt.then_block, depth + 1, lines)
        if stmt.else_block is not None:
            lines.append(pad + join_tokens(["}", "else", "{"]))
            _render_block(stmt.else_block, depth + 1, lines)
        lines.append(pad + "}")
    elif isinstance(stmt, ast.While):
        lines.append(pad + join_tokens(["while"] + expr_tokens(stmt.cond) + ["{"]))
        _render_block(stmt.body, depth + 1, lines)
        lines.append(pad + "}")
    else:  # pragma: no cover
        raise AssertionError(f"unhandled statement {stmt!r}")
