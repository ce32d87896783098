"""Recursive-descent parser for MiniLang.

Fails fast: the first offending token raises LangError carrying a single
diagnostic (SyntaxError, or NotAStatement for a well-formed expression in
statement position, mirroring javac's "not a statement").
"""

from __future__ import annotations

from rrlab.minilang import ast
from rrlab.minilang.diagnostics import Category, Diagnostic, LangError, Span
from rrlab.minilang.lexer import Token, TokenKind, lex, normalize_source


class _Cursor:
    def __init__(self, tokens: list[Token], source_len: int):
        self.tokens = tokens
        self.pos = 0
        self.source_len = source_len

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def span_here(self) -> Span:
        tok = self.peek()
        if tok is None:
            return Span(self.source_len, self.source_len)
        return tok.span

    def error(self, message: str, category: Category = Category.SYNTAX_ERROR) -> LangError:
        return LangError(Diagnostic(category, self.span_here(), message))

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            got = "end of input" if tok is None else repr(tok.text)
            raise self.error(f"expected {text!r}, found {got}")
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            got = "end of input" if tok is None else repr(tok.text)
            raise self.error(f"expected identifier, found {got}")
        return self.advance()


def parse(tokens: list[Token], source_len: int = 0) -> ast.Program:
    """Parse a token list into a Program. Raises LangError on the first error."""
    if tokens:
        source_len = max(source_len, tokens[-1].span.end)
    cur = _Cursor(tokens, source_len)
    program = _parse_program(cur)
    if cur.peek() is not None:
        raise cur.error("trailing tokens after function body")
    return program


def parse_source(source: str) -> ast.Program:
    """Normalize, lex, and parse in one step."""
    text = normalize_source(source)
    return parse(lex(text), len(text))


def _parse_program(cur: _Cursor) -> ast.Program:
    start = cur.span_here().start
    cur.expect("fn")
    name = cur.expect_ident()
    if name.text != "main":
        raise LangError(
            Diagnostic(Category.SYNTAX_ERROR, name.span, "top-level function must be named 'main'")
        )
    cur.expect("(")
    params: list[ast.Param] = []
    if cur.peek() is not None and cur.peek().text != ")":
        while True:
            p = cur.expect_ident()
            cur.expect(":")
            cur.expect("int")
            params.append(ast.Param(p.text, p.span))
            if cur.peek() is not None and cur.peek().text == ",":
                cur.advance()
                continue
            break
    cur.expect(")")
    cur.expect("->")
    cur.expect("int")
    body = _parse_block(cur)
    return ast.Program(params, body, Span(start, body.span.end))


def _parse_block(cur: _Cursor) -> ast.Block:
    start = cur.expect("{").span.start
    stmts: list[ast.Stmt] = []
    while True:
        tok = cur.peek()
        if tok is None:
            raise cur.error("expected '}' before end of input")
        if tok.text == "}":
            end = cur.advance().span.end
            return ast.Block(stmts, Span(start, end))
        stmts.append(_parse_stmt(cur))


_EXPR_START_OPS = ("(", "-")


def _starts_expression(cur: _Cursor) -> bool:
    tok = cur.peek()
    if tok is None:
        return False
    if tok.kind in (TokenKind.INT,):
        return True
    if tok.text in ("true", "false", "not"):
        return True
    if tok.text in _EXPR_START_OPS:
        return True
    if tok.kind is TokenKind.IDENT:
        nxt = cur.peek(1)
        return nxt is None or nxt.text != "="
    return False


def _parse_stmt(cur: _Cursor) -> ast.Stmt:
    tok = cur.peek()
    assert tok is not None
    if tok.text == "let":
        start = cur.advance().span.start
        name = cur.expect_ident()
        cur.expect(":")
        type_tok = cur.peek()
        if type_tok is None or type_tok.text not in ("int", "bool"):
            raise cur.error("expected type 'int' or 'bool'")
        cur.advance()
        decl_type = ast.Type(type_tok.text)
        cur.expect("=")
        value = _parse_expr(cur)
        end = cur.expect(";").span.end
        return ast.Let(name.text, decl_type, value, Span(start, end))
    if tok.text == "if":
        start = cur.advance().span.start
        cond = _parse_expr(cur)
        then_block = _parse_block(cur)
        else_block = None
        end = then_block.span.end
        if cur.peek() is not None and cur.peek().text == "else":
            cur.advance()
            else_block = _parse_block(cur)
            end = else_block.span.end
        return ast.If(cond, then_block, else_block, Span(start, end))
    if tok.text == "while":
        start = cur.advance().span.start
        cond = _parse_expr(cur)
        body = _parse_block(cur)
        return ast.While(cond, body, Span(start, body.span.end))
    if tok.text == "return":
        start = cur.advance().span.start
        value = _parse_expr(cur)
        end = cur.expect(";").span.end
        return ast.Return(value, Span(start, end))
    if tok.kind is TokenKind.IDENT and cur.peek(1) is not None and cur.peek(1).text == "=":
        name = cur.advance()
        cur.expect("=")
        value = _parse_expr(cur)
        end = cur.expect(";").span.end
        return ast.Assign(name.text, value, Span(name.span.start, end))
    if _starts_expression(cur):
        # A full expression in statement position is NotAStatement, not a
        # generic parse error; a malformed expression still raises SyntaxError.
        expr = _parse_expr(cur)
        if cur.peek() is not None and cur.peek().text == ";":
            cur.advance()
        raise LangError(
            Diagnostic(Category.NOT_A_STATEMENT, expr.span, "expression is not a statement")
        )
    raise cur.error(f"expected statement, found {tok.text!r}")


# --- expressions, lowest to highest precedence -------------------------------


def _parse_expr(cur: _Cursor) -> ast.Expr:
    return _parse_or(cur)


def _parse_or(cur: _Cursor) -> ast.Expr:
    left = _parse_and(cur)
    while cur.peek() is not None and cur.peek().text == "or":
        cur.advance()
        right = _parse_and(cur)
        left = ast.Binary("or", left, right, Span(left.span.start, right.span.end))
    return left


def _parse_and(cur: _Cursor) -> ast.Expr:
    left = _parse_not(cur)
    while cur.peek() is not None and cur.peek().text == "and":
        cur.advance()
        right = _parse_not(cur)
        left = ast.Binary("and", left, right, Span(left.span.start, right.span.end))
    return left


def _parse_not(cur: _Cursor) -> ast.Expr:
    tok = cur.peek()
    if tok is not None and tok.text == "not":
        start = cur.advance().span.start
        operand = _parse_not(cur)
        return ast.Unary("not", operand, Span(start, operand.span.end))
    return _parse_cmp(cur)


def _parse_cmp(cur: _Cursor) -> ast.Expr:
    left = _parse_add(cur)
    tok = cur.peek()
    if tok is not None and tok.text in ast.CMP_OPS:
        cur.advance()
        right = _parse_add(cur)
        return ast.Binary(tok.text, left, right, Span(left.span.start, right.span.end))
    return left


def _parse_add(cur: _Cursor) -> ast.Expr:
    left = _parse_mul(cur)
    while cur.peek() is not None and cur.peek().text in ("+", "-"):
        op = cur.advance().text
        right = _parse_mul(cur)
        left = ast.Binary(op, left, right, Span(left.span.start, right.span.end))
    return left


def _parse_mul(cur: _Cursor) -> ast.Expr:
    left = _parse_unary(cur)
    while cur.peek() is not None and cur.peek().text in ("*", "/", "%"):
        op = cur.advance().text
        right = _parse_unary(cur)
        left = ast.Binary(op, left, right, Span(left.span.start, right.span.end))
    return left


def _parse_unary(cur: _Cursor) -> ast.Expr:
    tok = cur.peek()
    if tok is not None and tok.text == "-":
        start = cur.advance().span.start
        operand = _parse_unary(cur)
        return ast.Unary("-", operand, Span(start, operand.span.end))
    return _parse_primary(cur)


def _parse_primary(cur: _Cursor) -> ast.Expr:
    tok = cur.peek()
    if tok is None:
        raise cur.error("expected expression, found end of input")
    if tok.kind is TokenKind.INT:
        cur.advance()
        return ast.IntLit(int(tok.text), tok.span)
    if tok.text == "true":
        cur.advance()
        return ast.BoolLit(True, tok.span)
    if tok.text == "false":
        cur.advance()
        return ast.BoolLit(False, tok.span)
    if tok.kind is TokenKind.IDENT:
        cur.advance()
        return ast.Var(tok.text, tok.span)
    if tok.text == "(":
        start = cur.advance().span.start
        inner = _parse_expr(cur)
        end = cur.expect(")").span.end
        # Parenthesization is structural only; widen the span for diagnostics.
        inner.span = Span(start, end)
        return inner
    raise cur.error(f"expected expression, found {tok.text!r}")
