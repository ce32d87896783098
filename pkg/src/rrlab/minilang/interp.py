"""Deterministic MiniLang interpreter with a step budget.

Semantics notes (documented in docs/minilang.md):
- integers are 64-bit two's-complement with wrapping arithmetic,
- `/` and `%` follow Python's floored division,
- `and` / `or` short-circuit,
- every statement and expression node costs one step; exceeding the budget
  yields BudgetExhausted (treated as test failure downstream).

Precondition: check(program) is empty. Running unchecked programs raises
InterpreterError rather than producing an outcome.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from rrlab.errors import RRLabError
from rrlab.minilang import ast

DEFAULT_STEP_BUDGET = 10_000

_I64_MASK = (1 << 64) - 1
_I64_SIGN = 1 << 63


def _wrap(v: int) -> int:
    v &= _I64_MASK
    return v - (1 << 64) if v & _I64_SIGN else v


class OutcomeKind(enum.Enum):
    RETURNED = "returned"
    RUNTIME_ERROR = "runtime_error"
    BUDGET_EXHAUSTED = "budget_exhausted"


class RuntimeFault(enum.Enum):
    DIV_BY_ZERO = "DivByZero"
    MOD_BY_ZERO = "ModByZero"


@dataclass(frozen=True)
class ExecOutcome:
    kind: OutcomeKind
    steps_used: int
    value: int | None = None
    fault: RuntimeFault | None = None

    @staticmethod
    def returned(value: int, steps: int) -> "ExecOutcome":
        return ExecOutcome(OutcomeKind.RETURNED, steps, value=value)


class InterpreterError(RRLabError):
    """Precondition violation: the program was not checked before interpret()."""


class _Fault(Exception):
    def __init__(self, fault: RuntimeFault):
        self.fault = fault


class _OutOfSteps(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: int):
        self.value = value


class _Machine:
    def __init__(self, budget: int):
        self.budget = budget
        self.steps = 0
        self.scopes: list[dict[str, int | bool]] = []

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            self.steps = self.budget
            raise _OutOfSteps()

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise InterpreterError(f"undefined variable {name!r} at runtime (unchecked program?)")

    def assign(self, name: str, value) -> None:
        for scope in reversed(self.scopes):
            if name in scope:
                scope[name] = value
                return
        raise InterpreterError(f"assignment to undefined {name!r} at runtime (unchecked program?)")


def interpret_reference(
    program: ast.Program, inputs: list[int], step_budget: int = DEFAULT_STEP_BUDGET
) -> ExecOutcome:
    """Tree-walking reference evaluator.

    interpret() in compile.py is the production path; this one keeps the
    semantics spelled out plainly and serves as its differential oracle."""
    if step_budget <= 0:
        raise InterpreterError("step budget must be positive")
    if len(inputs) != len(program.params):
        raise InterpreterError(
            f"expected {len(program.params)} inputs, got {len(inputs)}"
        )
    m = _Machine(step_budget)
    m.scopes.append({p.name: _wrap(int(v)) for p, v in zip(program.params, inputs)})
    try:
        _exec_block(program.body, m)
    except _Return as ret:
        return ExecOutcome.returned(ret.value, m.steps)
    except _Fault as fault:
        return ExecOutcome(OutcomeKind.RUNTIME_ERROR, m.steps, fault=fault.fault)
    except _OutOfSteps:
        return ExecOutcome(OutcomeKind.BUDGET_EXHAUSTED, m.steps)
    raise InterpreterError("function body completed without return (unchecked program?)")


def _exec_block(block: ast.Block, m: _Machine) -> None:
    m.scopes.append({})
    try:
        for stmt in block.stmts:
            _exec_stmt(stmt, m)
    finally:
        m.scopes.pop()


def _exec_stmt(stmt: ast.Stmt, m: _Machine) -> None:
    m.tick()
    if isinstance(stmt, ast.Let):
        m.scopes[-1][stmt.name] = _eval(stmt.value, m)
    elif isinstance(stmt, ast.Assign):
        m.assign(stmt.name, _eval(stmt.value, m))
    elif isinstance(stmt, ast.If):
        if _eval(stmt.cond, m):
            _exec_block(stmt.then_block, m)
        elif stmt.else_block is not None:
            _exec_block(stmt.else_block, m)
    elif isinstance(stmt, ast.While):
        while _eval(stmt.cond, m):
            _exec_block(stmt.body, m)
            m.tick()  # each iteration costs a step, so unbounded loops exhaust
    elif isinstance(stmt, ast.Return):
        raise _Return(_eval(stmt.value, m))
    else:  # pragma: no cover
        raise InterpreterError(f"unhandled statement {stmt!r}")


def _eval(expr: ast.Expr, m: _Machine):
    m.tick()
    if isinstance(expr, ast.IntLit):
        return expr.value
    if isinstance(expr, ast.BoolLit):
        return expr.value
    if isinstance(expr, ast.Var):
        return m.lookup(expr.name)
    if isinstance(expr, ast.Unary):
        if expr.op == "-":
            return _wrap(-_eval(expr.operand, m))
        return not _eval(expr.operand, m)
    if isinstance(expr, ast.Binary):
        op = expr.op
        if op == "and":
            return bool(_eval(expr.left, m)) and bool(_eval(expr.right, m))
        if op == "or":
            return bool(_eval(expr.left, m)) or bool(_eval(expr.right, m))
        left = _eval(expr.left, m)
        right = _eval(expr.right, m)
        if op == "+":
            return _wrap(left + right)
        if op == "-":
            return _wrap(left - right)
        if op == "*":
            return _wrap(left * right)
        if op == "/":
            if right == 0:
                raise _Fault(RuntimeFault.DIV_BY_ZERO)
            return _wrap(left // right)
        if op == "%":
            if right == 0:
                raise _Fault(RuntimeFault.MOD_BY_ZERO)
            return _wrap(left % right)
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
    raise InterpreterError(f"unhandled expression {expr!r}")  # pragma: no cover
