"""Closure-compiling evaluator: the fast path behind interpret().

Compiles a checked program once into nested Python closures; repeated runs
(mutation probing, test execution) then avoid tree-walking dispatch. Step
accounting is identical to the reference tree-walk in interp.py: one step
per statement execution, one per expression node, one per loop iteration.

Only valid for check-clean programs: the environment is a single flat dict,
which is observationally equivalent to block scoping exactly because the
checker forbids shadowing and use-before-declaration.
"""

from __future__ import annotations

from rrlab.minilang import ast
from rrlab.minilang.interp import (
    DEFAULT_STEP_BUDGET,
    ExecOutcome,
    InterpreterError,
    OutcomeKind,
    RuntimeFault,
)

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


class _State:
    __slots__ = ("steps", "budget")

    def __init__(self, budget: int):
        self.steps = 0
        self.budget = budget


class _Stop(Exception):
    __slots__ = ()


_STOP = _Stop()  # singleton: raised hot, never inspected


class _Fault(Exception):
    __slots__ = ("fault",)

    def __init__(self, fault: RuntimeFault):
        self.fault = fault


class _Return(Exception):
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value


def _compile_expr(e: ast.Expr):
    if isinstance(e, ast.IntLit):
        v = e.value

        def lit(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return v

        return lit
    if isinstance(e, ast.BoolLit):
        v = e.value

        def blit(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return v

        return blit
    if isinstance(e, ast.Var):
        name = e.name

        def var(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return env[name]

        return var
    if isinstance(e, ast.Unary):
        operand = _compile_expr(e.operand)
        if e.op == "-":

            def neg(env, m):
                m.steps += 1
                if m.steps > m.budget:
                    raise _STOP
                return ((-operand(env, m) + _SIGN) & _MASK) - _SIGN

            return neg

        def notf(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return not operand(env, m)

        return notf
    assert isinstance(e, ast.Binary)
    op = e.op
    left = _compile_expr(e.left)
    right = _compile_expr(e.right)
    if op == "and":

        def andf(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return left(env, m) and right(env, m)

        return andf
    if op == "or":

        def orf(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return left(env, m) or right(env, m)

        return orf
    if op == "+":

        def add(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return ((left(env, m) + right(env, m) + _SIGN) & _MASK) - _SIGN

        return add
    if op == "-":

        def sub(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return ((left(env, m) - right(env, m) + _SIGN) & _MASK) - _SIGN

        return sub
    if op == "*":

        def mul(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            return ((left(env, m) * right(env, m) + _SIGN) & _MASK) - _SIGN

        return mul
    if op == "/":

        def div(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            d = right(env, m)
            if d == 0:
                raise _Fault(RuntimeFault.DIV_BY_ZERO)
            return ((left(env, m) // d + _SIGN) & _MASK) - _SIGN

        return div
    if op == "%":

        def mod(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            d = right(env, m)
            if d == 0:
                raise _Fault(RuntimeFault.MOD_BY_ZERO)
            return ((left(env, m) % d + _SIGN) & _MASK) - _SIGN

        return mod
    cmp = {
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "==": lambda a, b: a == b,
        "!=": lambda a, b: a != b,
    }[op]

    def cmpf(env, m):
        m.steps += 1
        if m.steps > m.budget:
            raise _STOP
        return cmp(left(env, m), right(env, m))

    return cmpf


def _compile_stmt(s: ast.Stmt):
    if isinstance(s, (ast.Let, ast.Assign)):
        name = s.name
        value = _compile_expr(s.value)

        def assign(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            env[name] = value(env, m)

        return assign
    if isinstance(s, ast.Return):
        value = _compile_expr(s.value)

        def ret(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            raise _Return(value(env, m))

        return ret
    if isinstance(s, ast.If):
        cond = _compile_expr(s.cond)
        then_fns = [_compile_stmt(t) for t in s.then_block.stmts]
        else_fns = [_compile_stmt(t) for t in s.else_block.stmts] if s.else_block else []

        def iff(env, m):
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP
            if cond(env, m):
                for fn in then_fns:
                    fn(env, m)
            else:
                for fn in else_fns:
                    fn(env, m)

        return iff
    assert isinstance(s, ast.While)
    cond = _compile_expr(s.cond)
    body_fns = [_compile_stmt(t) for t in s.body.stmts]

    def whilef(env, m):
        m.steps += 1
        if m.steps > m.budget:
            raise _STOP
        while cond(env, m):
            for fn in body_fns:
                fn(env, m)
            m.steps += 1
            if m.steps > m.budget:
                raise _STOP

    return whilef


class CompiledProgram:
    """A program compiled to closures; run() is pure and deterministic."""

    __slots__ = ("param_names", "_body")

    def __init__(self, program: ast.Program):
        self.param_names = [p.name for p in program.params]
        self._body = [_compile_stmt(s) for s in program.body.stmts]

    def run(self, inputs, budget: int = DEFAULT_STEP_BUDGET) -> ExecOutcome:
        if budget <= 0:
            raise InterpreterError("step budget must be positive")
        if len(inputs) != len(self.param_names):
            raise InterpreterError(
                f"expected {len(self.param_names)} inputs, got {len(inputs)}"
            )
        env = {
            name: ((int(v) + _SIGN) & _MASK) - _SIGN
            for name, v in zip(self.param_names, inputs)
        }
        m = _State(budget)
        try:
            for fn in self._body:
                fn(env, m)
        except _Return as ret:
            return ExecOutcome.returned(ret.value, m.steps)
        except _Fault as fault:
            return ExecOutcome(OutcomeKind.RUNTIME_ERROR, m.steps, fault=fault.fault)
        except _Stop:
            return ExecOutcome(OutcomeKind.BUDGET_EXHAUSTED, budget)
        raise InterpreterError("function body completed without return (unchecked program?)")


def compile_program(program: ast.Program) -> CompiledProgram:
    return CompiledProgram(program)


def interpret(
    program: ast.Program, inputs, step_budget: int = DEFAULT_STEP_BUDGET
) -> ExecOutcome:
    """Run main(inputs) under the step budget. Deterministic in its arguments.

    Precondition: check(program) is empty."""
    return CompiledProgram(program).run(inputs, step_budget)
