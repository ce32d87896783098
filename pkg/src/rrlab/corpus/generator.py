"""Random well-formed MiniLang program generation.

Programs are type-correct by construction and total on the probe domain:
loops are bounded counter loops, divisors are nonzero constants, and every
body ends with a return. Generation is a pure function of (seed, config).
"""

from __future__ import annotations

import random

from rrlab.corpus.types import SizeConfig
from rrlab.errors import GenerationExhaustedError
from rrlab.minilang import ast, check, render

PARAM_NAMES = ("a", "b", "c")
LOCAL_NAMES = ("x", "y", "z", "w", "u", "v")
COUNTER_NAMES = ("i", "j", "k")

MAX_CONSECUTIVE_REJECTS = 1000


class _Gen:
    def __init__(self, rng: random.Random, cfg: SizeConfig):
        self.rng = rng
        self.cfg = cfg
        self.scope: dict[str, ast.Type] = {}
        self.protected: set[str] = set()  # loop counters: assigned only by their loop
        self.counters_used = 0

    # --- expressions ---------------------------------------------------------

    def int_vars(self) -> list[str]:
        return [n for n, t in self.scope.items() if t is ast.Type.INT]

    def bool_vars(self) -> list[str]:
        return [n for n, t in self.scope.items() if t is ast.Type.BOOL]

    def int_expr(self, depth: int) -> ast.Expr:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            choices = self.int_vars()
            if choices and rng.random() < 0.7:
                return ast.Var(rng.choice(choices))
            value = rng.randint(0, 9)
            lit = ast.IntLit(value)
            if value != 0 and rng.random() < 0.15:
                return ast.Unary("-", lit)
            return lit
        op = rng.choices(["+", "-", "*", "/", "%"], weights=[4, 4, 3, 1, 1])[0]
        left = self.int_expr(depth - 1)
        if op in ("/", "%"):
            right: ast.Expr = ast.IntLit(rng.randint(1, 4))  # nonzero const divisor
        else:
            right = self.int_expr(depth - 1)
        return ast.Binary(op, left, right)

    def bool_expr(self, depth: int) -> ast.Expr:
        rng = self.rng
        roll = rng.random()
        if depth > 0 and roll < 0.2:
            op = rng.choice(["and", "or"])
            return ast.Binary(op, self.bool_expr(depth - 1), self.bool_expr(depth - 1))
        if depth > 0 and roll < 0.3:
            return ast.Unary("not", self.bool_expr(depth - 1))
        bools = self.bool_vars()
        if bools and roll < 0.4:
            return ast.Var(rng.choice(bools))
        op = rng.choice(list(ast.CMP_OPS))
        return ast.Binary(op, self.int_expr(1), self.int_expr(1))

    # --- statements ----------------------------------------------------------

    def fresh_local(self) -> str | None:
        free = [n for n in LOCAL_NAMES if n not in self.scope]
        return free[0] if free else None

    def fresh_counter(self) -> str | None:
        if self.counters_used >= len(COUNTER_NAMES):
            return None
        name = COUNTER_NAMES[self.counters_used]
        self.counters_used += 1
        return name

    def stmt(self, depth: int) -> list[ast.Stmt]:
        """One random statement (a while arrives with its counter let)."""
        rng = self.rng
        kinds = ["let", "assign"]
        weights = [3, 3]
        if depth < self.cfg.max_depth:
            nested = 2 if depth == 0 else 1  # nesting gets rarer with depth
            kinds.append("if")
            weights.append(nested)
            if self.fresh_counter_available():
                kinds.append("while")
                weights.append(nested)
        kind = rng.choices(kinds, weights=weights)[0]
        if kind == "let":
            name = self.fresh_local()
            if name is None:
                kind = "assign"
            else:
                if rng.random() < 0.2:
                    value: ast.Expr = self.bool_expr(self.cfg.max_expr_depth - 1)
                    decl = ast.Type.BOOL
                else:
                    value = self.int_expr(self.cfg.max_expr_depth)
                    decl = ast.Type.INT
                self.scope[name] = decl
                return [ast.Let(name, decl, value)]
        if kind == "assign":
            targets = [
                n for n in self.scope if n not in self.protected and self.scope[n] is ast.Type.INT
            ]
            if not targets:
                name = self.fresh_local()
                if name is None:
                    return [ast.Return(self.int_expr(1))]
                self.scope[name] = ast.Type.INT
                return [ast.Let(name, ast.Type.INT, self.int_expr(self.cfg.max_expr_depth))]
            target = rng.choice(targets)
            return [ast.Assign(target, self.int_expr(self.cfg.max_expr_depth))]
        if kind == "if":
            cond = self.bool_expr(self.cfg.max_expr_depth - 1)
            then_block = self.block(depth + 1, rng.randint(1, 2), allow_return=True)
            else_block = None
            if rng.random() < 0.6:
                else_block = self.block(depth + 1, rng.randint(1, 2), allow_return=True)
            return [ast.If(cond, then_block, else_block)]
        # while: bounded counter loop
        counter = self.fresh_counter()
        assert counter is not None
        bound = rng.randint(1, 5)
        self.scope[counter] = ast.Type.INT
        self.protected.add(counter)
        body = self.block(depth + 1, self.rng.randint(1, 2), allow_return=False)
        body.stmts.append(
            ast.Assign(counter, ast.Binary("+", ast.Var(counter), ast.IntLit(1)))
        )
        loop = ast.While(ast.Binary("<", ast.Var(counter), ast.IntLit(bound)), body)
        return [ast.Let(counter, ast.Type.INT, ast.IntLit(0)), loop]

    def fresh_counter_available(self) -> bool:
        return self.counters_used < len(COUNTER_NAMES)

    def block(self, depth: int, n_stmts: int, allow_return: bool) -> ast.Block:
        outer_scope = dict(self.scope)
        stmts: list[ast.Stmt] = []
        for _ in range(n_stmts):
            stmts.extend(self.stmt(depth))
        if allow_return and self.rng.random() < 0.35:
            stmts.append(ast.Return(self.int_expr(2)))
        # names declared inside the block go out of scope
        self.scope = outer_scope
        return ast.Block(stmts)

    def program(self) -> ast.Program:
        rng = self.rng
        n_params = rng.randint(self.cfg.min_params, self.cfg.max_params)
        params = [ast.Param(PARAM_NAMES[i]) for i in range(n_params)]
        self.scope = {p.name: ast.Type.INT for p in params}
        self.protected = set()
        self.counters_used = 0
        stmts: list[ast.Stmt] = []
        for _ in range(rng.randint(self.cfg.min_stmts, self.cfg.max_stmts)):
            stmts.extend(self.stmt(0))
        stmts.append(ast.Return(self.int_expr(self.cfg.max_expr_depth)))
        return ast.Program(params, ast.Block(stmts))


def next_program(rng: random.Random, cfg: SizeConfig, seen: set[str]) -> ast.Program:
    """One fresh well-formed program whose rendering is not in `seen`."""
    rejects = 0
    while True:
        program = _Gen(rng, cfg).program()
        text = render(program)
        if text not in seen and not check(program):
            seen.add(text)
            return program
        rejects += 1
        if rejects >= MAX_CONSECUTIVE_REJECTS:
            raise GenerationExhaustedError(f"{rejects} consecutive rejected programs")


def generate_programs(seed: int, count: int, size_cfg: SizeConfig | None = None) -> list[ast.Program]:
    """Generate `count` distinct well-formed programs, deterministic in seed."""
    cfg = size_cfg or SizeConfig()
    rng = random.Random(seed)
    seen: set[str] = set()
    return [next_program(rng, cfg, seen) for _ in range(count)]
