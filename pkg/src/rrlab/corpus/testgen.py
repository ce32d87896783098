"""Derivation of developer tests and reference-generated tests.

Developer tests: k cases that all pass on the fixed program, at least one of
which fails on the buggy program (the bug is observable). Reference tests:
k cases with inputs drawn from the probe domain and expected values computed
by interpreting the fixed program — computed, never asserted.
"""

from __future__ import annotations

import random

from rrlab.corpus.mutate import PROBE_BOUND, outcomes_differ, probe_points
from rrlab.corpus.types import BugSample, TestCase
from rrlab.errors import CannotExposeBugError
from rrlab.minilang import CompiledProgram, ast, compile_program, parse_source
from rrlab.minilang.interp import DEFAULT_STEP_BUDGET, OutcomeKind

MAX_PROBES = 10_000


def _returning_input(
    program: CompiledProgram, rng: random.Random, bound: int, budget: int
) -> tuple[tuple[int, ...], int]:
    """A random probe input on which the program returns, with its value."""
    for _ in range(MAX_PROBES):
        inputs = tuple(rng.randint(-bound, bound) for _ in range(len(program.param_names)))
        outcome = program.run(inputs, budget)
        if outcome.kind is OutcomeKind.RETURNED:
            return inputs, outcome.value  # type: ignore[return-value]
    raise CannotExposeBugError("program returns on no sampled probe input")


def make_dev_tests(
    sample: BugSample,
    seed: int,
    k: int,
    budget: int = DEFAULT_STEP_BUDGET,
    bound: int = PROBE_BOUND,
) -> list[TestCase]:
    """Exactly k tests passing on fixed, with >=1 exposing the bug on buggy."""
    if k < 1:
        raise ValueError("k must be positive")
    rng = random.Random(seed)
    fixed = compile_program(parse_source(sample.fixed_program))
    buggy = compile_program(parse_source(sample.buggy_program))
    exposing: TestCase | None = None
    probes = 0
    for inputs in probe_points(len(fixed.param_names), bound, rng=random.Random(seed + 1)):
        probes += 1
        if probes > MAX_PROBES:
            break
        got = fixed.run(inputs, budget)
        if got.kind is not OutcomeKind.RETURNED:
            continue
        if outcomes_differ(got, buggy.run(inputs, budget)):
            exposing = TestCase(tuple(inputs), got.value)  # type: ignore[arg-type]
            break
    if exposing is None:
        raise CannotExposeBugError(f"{sample.id}: no probe input exposes the bug")
    tests = [exposing]
    while len(tests) < k:
        inputs, value = _returning_input(fixed, rng, bound, budget)
        tests.append(TestCase(inputs, value))
    return tests


def make_rgt_tests(
    fixed: ast.Program,
    seed: int,
    k: int,
    budget: int = DEFAULT_STEP_BUDGET,
    bound: int = PROBE_BOUND,
) -> list[TestCase]:
    """k tests with uniform probe inputs; expected values come from the fixed
    program, so inputs where it does not return are resampled."""
    rng = random.Random(seed)
    compiled = compile_program(fixed)
    tests = []
    for _ in range(k):
        inputs, value = _returning_input(compiled, rng, bound, budget)
        tests.append(TestCase(inputs, value))
    return tests
