"""MiniLang static checker: name resolution, type checking, return-path analysis.

This is MiniLang's "compiler": an empty diagnostic list means the program is
safe to interpret (no undefined-name or type faults can occur at runtime).
Unknown types propagate silently so each defect is reported exactly once.
"""

from __future__ import annotations

from rrlab.minilang import ast
from rrlab.minilang.diagnostics import Category, Diagnostic, Span
from rrlab.minilang.lexer import lex, normalize_source
from rrlab.minilang.parser import parse

_UNKNOWN = "unknown"  # error sentinel; never reported twice


class _Scopes:
    """Lexical block scopes; shadowing is forbidden (DuplicateDefinition)."""

    def __init__(self) -> None:
        self.stack: list[dict[str, ast.Type]] = [{}]

    def push(self) -> None:
        self.stack.append({})

    def pop(self) -> None:
        self.stack.pop()

    def lookup(self, name: str) -> ast.Type | None:
        for scope in reversed(self.stack):
            if name in scope:
                return scope[name]
        return None

    def declare(self, name: str, type_: ast.Type) -> bool:
        if self.lookup(name) is not None:
            return False
        self.stack[-1][name] = type_
        return True


def check(program: ast.Program) -> list[Diagnostic]:
    """Return all diagnostics, ordered by span. Empty list == compilable."""
    diags: list[Diagnostic] = []
    scopes = _Scopes()
    for param in program.params:
        if not scopes.declare(param.name, ast.Type.INT):
            diags.append(
                Diagnostic(
                    Category.DUPLICATE_DEFINITION,
                    param.span,
                    f"duplicate parameter {param.name!r}",
                )
            )
    _check_block(program.body, scopes, diags)
    if not _always_returns(program.body):
        end = program.body.span.end
        diags.append(
            Diagnostic(
                Category.MISSING_RETURN,
                Span(max(end - 1, 0), end),
                "not all control paths return a value",
            )
        )
    diags.sort(key=lambda d: (d.span.start, d.span.end, d.category.value))
    return diags


def analyze(source: str) -> list[Diagnostic]:
    """lex + parse + check; lex/parse failures yield a single-diagnostic list."""
    from rrlab.minilang.diagnostics import LangError

    try:
        text = normalize_source(source)
        program = parse(lex(text), len(text))
    except LangError as err:
        return [err.diagnostic]
    return check(program)


def _check_block(block: ast.Block, scopes: _Scopes, diags: list[Diagnostic]) -> None:
    scopes.push()
    for stmt in block.stmts:
        _check_stmt(stmt, scopes, diags)
    scopes.pop()


def _check_stmt(stmt: ast.Stmt, scopes: _Scopes, diags: list[Diagnostic]) -> None:
    if isinstance(stmt, ast.Let):
        value_t = _type_of(stmt.value, scopes, diags)
        if value_t != _UNKNOWN and value_t != stmt.decl_type:
            diags.append(
                Diagnostic(
                    Category.TYPE_MISMATCH,
                    stmt.value.span,
                    f"cannot initialize {stmt.decl_type.value} variable "
                    f"{stmt.name!r} with {value_t.value}",
                )
            )
        if not scopes.declare(stmt.name, stmt.decl_type):
            diags.append(
                Diagnostic(
                    Category.DUPLICATE_DEFINITION,
                    stmt.span,
                    f"variable {stmt.name!r} is already defined",
                )
            )
    elif isinstance(stmt, ast.Assign):
        value_t = _type_of(stmt.value, scopes, diags)
        target_t = scopes.lookup(stmt.name)
        if target_t is None:
            diags.append(
                Diagnostic(
                    Category.UNDEFINED_IDENTIFIER,
                    stmt.span,
                    f"assignment to undefined variable {stmt.name!r}",
                )
            )
        elif value_t != _UNKNOWN and value_t != target_t:
            diags.append(
                Diagnostic(
                    Category.TYPE_MISMATCH,
                    stmt.value.span,
                    f"cannot assign {value_t.value} to {target_t.value} variable {stmt.name!r}",
                )
            )
    elif isinstance(stmt, ast.If):
        _check_cond(stmt.cond, scopes, diags)
        _check_block(stmt.then_block, scopes, diags)
        if stmt.else_block is not None:
            _check_block(stmt.else_block, scopes, diags)
    elif isinstance(stmt, ast.While):
        _check_cond(stmt.cond, scopes, diags)
        _check_block(stmt.body, scopes, diags)
    elif isinstance(stmt, ast.Return):
        value_t = _type_of(stmt.value, scopes, diags)
        if value_t != _UNKNOWN and value_t != ast.Type.INT:
            diags.append(
                Diagnostic(
                    Category.TYPE_MISMATCH,
                    stmt.value.span,
                    "return value must be int",
                )
            )
    else:  # pragma: no cover - parser produces no other statement kinds
        raise AssertionError(f"unhandled statement {stmt!r}")


def _check_cond(cond: ast.Expr, scopes: _Scopes, diags: list[Diagnostic]) -> None:
    cond_t = _type_of(cond, scopes, diags)
    if cond_t != _UNKNOWN and cond_t != ast.Type.BOOL:
        diags.append(
            Diagnostic(Category.TYPE_MISMATCH, cond.span, "condition must be bool")
        )


def _type_of(expr: ast.Expr, scopes: _Scopes, diags: list[Diagnostic]):
    if isinstance(expr, ast.IntLit):
        return ast.Type.INT
    if isinstance(expr, ast.BoolLit):
        return ast.Type.BOOL
    if isinstance(expr, ast.Var):
        found = scopes.lookup(expr.name)
        if found is None:
            diags.append(
                Diagnostic(
                    Category.UNDEFINED_IDENTIFIER,
                    expr.span,
                    f"undefined variable {expr.name!r}",
                )
            )
            return _UNKNOWN
        return found
    if isinstance(expr, ast.Unary):
        operand_t = _type_of(expr.operand, scopes, diags)
        want = ast.Type.INT if expr.op == "-" else ast.Type.BOOL
        if operand_t != _UNKNOWN and operand_t != want:
            diags.append(
                Diagnostic(
                    Category.TYPE_MISMATCH,
                    expr.operand.span,
                    f"operand of {expr.op!r} must be {want.value}",
                )
            )
            return _UNKNOWN
        return want if operand_t != _UNKNOWN else _UNKNOWN
    if isinstance(expr, ast.Binary):
        left_t = _type_of(expr.left, scopes, diags)
        right_t = _type_of(expr.right, scopes, diags)
        if expr.op in ast.ARITH_OPS:
            return _require(expr, left_t, right_t, ast.Type.INT, ast.Type.INT, diags)
        if expr.op in ("<", "<=", ">", ">="):
            return _require(expr, left_t, right_t, ast.Type.INT, ast.Type.BOOL, diags)
        if expr.op in ("==", "!="):
            if _UNKNOWN in (left_t, right_t):
                return _UNKNOWN
            if left_t != right_t:
                diags.append(
                    Diagnostic(
                        Category.TYPE_MISMATCH,
                        expr.span,
                        f"operands of {expr.op!r} must have the same type",
                    )
                )
                return _UNKNOWN
            return ast.Type.BOOL
        if expr.op in ast.LOGIC_OPS:
            return _require(expr, left_t, right_t, ast.Type.BOOL, ast.Type.BOOL, diags)
    raise AssertionError(f"unhandled expression {expr!r}")  # pragma: no cover


def _require(expr: ast.Binary, left_t, right_t, want: ast.Type, result: ast.Type, diags):
    ok = True
    for side_t, side in ((left_t, expr.left), (right_t, expr.right)):
        if side_t == _UNKNOWN:
            ok = False
        elif side_t != want:
            diags.append(
                Diagnostic(
                    Category.TYPE_MISMATCH,
                    side.span,
                    f"operand of {expr.op!r} must be {want.value}",
                )
            )
            ok = False
    return result if ok else _UNKNOWN


def _always_returns(block: ast.Block) -> bool:
    for stmt in block.stmts:
        if isinstance(stmt, ast.Return):
            return True
        if (
            isinstance(stmt, ast.If)
            and stmt.else_block is not None
            and _always_returns(stmt.then_block)
            and _always_returns(stmt.else_block)
        ):
            return True
    return False
