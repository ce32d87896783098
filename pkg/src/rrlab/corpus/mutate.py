"""Single-hunk bug injection by AST mutation.

Mutations are syntax-preserving (applied to the tree, then re-rendered) and
must be observable: either the buggy program fails the static checker
(compile-error bug) or some probe input where the fixed program returns
yields a different outcome (semantic bug). Equivalent mutants are rejected.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass

from rrlab.corpus.types import BugSample, MutationKind
from rrlab.errors import NoViableMutationError
from rrlab.minilang import HOLE_MARKER, CompiledProgram, ast, check, compile_program, render
from rrlab.minilang.interp import DEFAULT_STEP_BUDGET, ExecOutcome

PROBE_BOUND = 8
SAMPLED_PROBES = 400  # for 3-parameter programs; 1-2 params are swept exhaustively
FRESH_NAMES = ("d", "q", "r")


# --- probe inputs -------------------------------------------------------------


def probe_points(n_params: int, bound: int = PROBE_BOUND, rng: random.Random | None = None):
    """Deterministic probe inputs: exhaustive small-first grid for <=2 params,
    seeded uniform samples otherwise."""
    if n_params <= 2:
        grid = []
        if n_params == 0:
            return [()]
        if n_params == 1:
            grid = [(v,) for v in range(-bound, bound + 1)]
        else:
            grid = [(v, w) for v in range(-bound, bound + 1) for w in range(-bound, bound + 1)]
        grid.sort(key=lambda t: (max(abs(x) for x in t), t))
        return grid
    rng = rng or random.Random(0)
    return [
        tuple(rng.randint(-bound, bound) for _ in range(n_params)) for _ in range(SAMPLED_PROBES)
    ]


def outcomes_differ(a: ExecOutcome, b: ExecOutcome) -> bool:
    return (a.kind, a.value, a.fault) != (b.kind, b.value, b.fault)


# --- mutation sites -----------------------------------------------------------


@dataclass(frozen=True)
class _Site:
    kind: MutationKind
    index: int  # preorder expression index or statement index, per kind


def _exprs_preorder(program: ast.Program) -> list[ast.Expr]:
    order: list[ast.Expr] = []

    def walk_expr(e: ast.Expr) -> None:
        order.append(e)
        if isinstance(e, ast.Unary):
            walk_expr(e.operand)
        elif isinstance(e, ast.Binary):
            walk_expr(e.left)
            walk_expr(e.right)

    def walk_block(b: ast.Block) -> None:
        for s in b.stmts:
            if isinstance(s, (ast.Let, ast.Assign, ast.Return)):
                walk_expr(s.value)
            elif isinstance(s, ast.If):
                walk_expr(s.cond)
                walk_block(s.then_block)
                if s.else_block is not None:
                    walk_block(s.else_block)
            elif isinstance(s, ast.While):
                walk_expr(s.cond)
                walk_block(s.body)

    walk_block(program.body)
    return order


def _stmts_preorder(program: ast.Program) -> list[tuple[ast.Block, int]]:
    order: list[tuple[ast.Block, int]] = []

    def walk_block(b: ast.Block) -> None:
        for i, s in enumerate(b.stmts):
            order.append((b, i))
            if isinstance(s, ast.If):
                walk_block(s.then_block)
                if s.else_block is not None:
                    walk_block(s.else_block)
            elif isinstance(s, ast.While):
                walk_block(s.body)

    walk_block(program.body)
    return order


def _reachable_flags(program: ast.Program) -> tuple[list[bool], list[bool]]:
    """Per-expression and per-statement reachability flags, in the preorder
    of _exprs_preorder/_stmts_preorder. Statements after a guaranteed return
    in the same block are unreachable; mutations there cannot be observable."""
    expr_flags: list[bool] = []
    stmt_flags: list[bool] = []

    def returns(s: ast.Stmt) -> bool:
        return isinstance(s, ast.Return) or (
            isinstance(s, ast.If)
            and s.else_block is not None
            and any(returns(t) for t in s.then_block.stmts)
            and any(returns(t) for t in s.else_block.stmts)
        )

    def mark_expr(e: ast.Expr, live: bool) -> None:
        expr_flags.append(live)
        if isinstance(e, ast.Unary):
            mark_expr(e.operand, live)
        elif isinstance(e, ast.Binary):
            mark_expr(e.left, live)
            mark_expr(e.right, live)

    def mark_block(b: ast.Block, live: bool) -> None:
        for s in b.stmts:
            stmt_flags.append(live)
            if isinstance(s, (ast.Let, ast.Assign, ast.Return)):
                mark_expr(s.value, live)
            elif isinstance(s, ast.If):
                mark_expr(s.cond, live)
                mark_block(s.then_block, live)
                if s.else_block is not None:
                    mark_block(s.else_block, live)
            elif isinstance(s, ast.While):
                mark_expr(s.cond, live)
                mark_block(s.body, live)
            if live and returns(s):
                live = False

    mark_block(program.body, True)
    return expr_flags, stmt_flags


def _collect_sites(program: ast.Program) -> list[_Site]:
    expr_live, stmt_live = _reachable_flags(program)
    sites: list[_Site] = []
    for i, expr in enumerate(_exprs_preorder(program)):
        if not expr_live[i]:
            continue
        if isinstance(expr, ast.Binary) and expr.op in ast.ARITH_OPS:
            sites.append(_Site(MutationKind.ARITH_OP_SWAP, i))
        if isinstance(expr, ast.Binary) and expr.op in ast.CMP_OPS:
            sites.append(_Site(MutationKind.CMP_OP_SWAP, i))
        if isinstance(expr, ast.IntLit):
            sites.append(_Site(MutationKind.CONST_PERTURB, i))
            sites.append(_Site(MutationKind.OFF_BY_ONE, i))
        if isinstance(expr, ast.Var):
            sites.append(_Site(MutationKind.IDENTIFIER_MISUSE, i))
    for j, (block, idx) in enumerate(_stmts_preorder(program)):
        if not stmt_live[j]:
            continue
        stmt = block.stmts[idx]
        if isinstance(stmt, (ast.If, ast.While)):
            sites.append(_Site(MutationKind.NEGATE_CONDITION, j))
        if isinstance(stmt, (ast.Let, ast.Assign, ast.Return)) and len(block.stmts) >= 2:
            sites.append(_Site(MutationKind.DELETE_STATEMENT, j))
        if isinstance(stmt, (ast.Let, ast.Assign)):
            sites.append(_Site(MutationKind.IDENTIFIER_MISUSE, -j - 1))  # rename target
    return sites


def _program_names(program: ast.Program) -> list[str]:
    names = [p.name for p in program.params]
    for block, idx in _stmts_preorder(program):
        stmt = block.stmts[idx]
        if isinstance(stmt, ast.Let) and stmt.name not in names:
            names.append(stmt.name)
    return names


def _apply(program: ast.Program, site: _Site, rng: random.Random) -> ast.Program | None:
    """Return a mutated deep copy, or None if the site admits no change."""
    mutant = copy.deepcopy(program)
    if site.kind in (
        MutationKind.ARITH_OP_SWAP,
        MutationKind.CMP_OP_SWAP,
        MutationKind.CONST_PERTURB,
        MutationKind.OFF_BY_ONE,
    ) or (site.kind is MutationKind.IDENTIFIER_MISUSE and site.index >= 0):
        node = _exprs_preorder(mutant)[site.index]
        if site.kind is MutationKind.ARITH_OP_SWAP:
            assert isinstance(node, ast.Binary)
            node.op = rng.choice([op for op in ast.ARITH_OPS if op != node.op])
        elif site.kind is MutationKind.CMP_OP_SWAP:
            assert isinstance(node, ast.Binary)
            node.op = rng.choice([op for op in ast.CMP_OPS if op != node.op])
        elif site.kind is MutationKind.CONST_PERTURB:
            assert isinstance(node, ast.IntLit)
            node.value = rng.choice([v for v in range(0, 10) if v != node.value])
        elif site.kind is MutationKind.OFF_BY_ONE:
            assert isinstance(node, ast.IntLit)
            node.value = node.value + 1 if node.value == 0 or rng.random() < 0.5 else node.value - 1
        else:
            assert isinstance(node, ast.Var)
            pool = [n for n in _program_names(mutant) if n != node.name]
            pool.extend(n for n in FRESH_NAMES if n != node.name)
            node.name = rng.choice(pool)
        return mutant
    stmts = _stmts_preorder(mutant)
    if site.kind is MutationKind.IDENTIFIER_MISUSE:
        block, idx = stmts[-site.index - 1]
        stmt = block.stmts[idx]
        assert isinstance(stmt, (ast.Let, ast.Assign))
        pool = [n for n in _program_names(mutant) if n != stmt.name]
        pool.extend(n for n in FRESH_NAMES if n != stmt.name)
        stmt.name = rng.choice(pool)
        return mutant
    block, idx = stmts[site.index]
    stmt = block.stmts[idx]
    if site.kind is MutationKind.NEGATE_CONDITION:
        assert isinstance(stmt, (ast.If, ast.While))
        stmt.cond = ast.Unary("not", stmt.cond)
        return mutant
    if site.kind is MutationKind.DELETE_STATEMENT:
        if len(block.stmts) < 2:
            return None
        del block.stmts[idx]
        return mutant
    raise AssertionError(site)  # pragma: no cover


# --- hunk extraction ----------------------------------------------------------


def line_hunk(fixed_src: str, buggy_src: str) -> tuple[int, int, str]:
    """Minimal contiguous differing line range of buggy (1-based inclusive)
    plus the fixed-side replacement text. Deletions are widened by one
    neighboring line so the buggy hunk is never empty."""
    f = fixed_src.splitlines()
    b = buggy_src.splitlines()
    p = 0
    while p < min(len(f), len(b)) and f[p] == b[p]:
        p += 1
    s = 0
    while s < min(len(f), len(b)) - p and f[len(f) - 1 - s] == b[len(b) - 1 - s]:
        s += 1
    bug_lo, bug_hi = p, len(b) - s
    fix_lo, fix_hi = p, len(f) - s
    if bug_lo == bug_hi:
        if bug_hi < len(b):
            bug_hi += 1
            fix_hi += 1
        else:
            bug_lo -= 1
            fix_lo -= 1
    fix_text = "\n".join(f[fix_lo:fix_hi])
    return bug_lo + 1, bug_hi, fix_text


def make_context(buggy_src: str, hunk_start: int, hunk_end: int) -> str:
    """Program lines with the hunk replaced by the hole marker."""
    lines = buggy_src.splitlines()
    kept = lines[: hunk_start - 1] + [HOLE_MARKER] + lines[hunk_end:]
    return "\n".join(kept)


# --- the operation ------------------------------------------------------------


def find_behavior_difference(
    fixed: ast.Program | CompiledProgram,
    buggy: ast.Program | CompiledProgram,
    rng: random.Random,
    budget: int = DEFAULT_STEP_BUDGET,
    fixed_outcomes: dict | None = None,
):
    """First probe input where fixed returns and buggy's outcome differs, or None."""
    fixed_c = fixed if isinstance(fixed, CompiledProgram) else compile_program(fixed)
    buggy_c = buggy if isinstance(buggy, CompiledProgram) else compile_program(buggy)
    cache = fixed_outcomes if fixed_outcomes is not None else {}
    for inputs in probe_points(len(fixed_c.param_names), rng=rng):
        got = cache.get(inputs)
        if got is None:
            got = fixed_c.run(inputs, budget)
            cache[inputs] = got
        if got.kind.value != "returned":
            continue
        if outcomes_differ(got, buggy_c.run(inputs, budget)):
            return inputs
    return None


def mutate(
    fixed: ast.Program,
    seed: int,
    sample_id: str = "bug",
    require_check_clean: bool = False,
    budget: int = DEFAULT_STEP_BUDGET,
) -> BugSample:
    """Inject one observable single-hunk bug. Deterministic in seed.

    With require_check_clean=True only semantic bugs (buggy program still
    compiles) are produced, as the semantic corpus splits demand.
    """
    rng = random.Random(seed)
    fixed_src = render(fixed)
    fixed_c = compile_program(fixed)
    sites = _collect_sites(fixed)
    rng.shuffle(sites)
    fixed_outcomes: dict = {}
    for site in sites:
        mutant = _apply(fixed, site, rng)
        if mutant is None:
            continue
        buggy_src = render(mutant)
        if buggy_src == fixed_src:
            continue
        compiles = not check(mutant)
        if not compiles:
            if require_check_clean:
                continue
        elif find_behavior_difference(fixed_c, mutant, rng, budget, fixed_outcomes) is None:
            continue  # equivalent mutant
        hunk_start, hunk_end, fix_text = line_hunk(fixed_src, buggy_src)
        sample = BugSample(
            id=sample_id,
            fixed_program=fixed_src,
            buggy_program=buggy_src,
            hunk_start=hunk_start,
            hunk_end=hunk_end,
            buggy_text="\n".join(buggy_src.splitlines()[hunk_start - 1 : hunk_end]),
            fix_text=fix_text,
            context_text=make_context(buggy_src, hunk_start, hunk_end),
        )
        sample.validate()
        return sample
    raise NoViableMutationError(f"no observable mutation for program {sample_id}")
