"""Four-stage execution-based patch discriminator.

A candidate patch is judged serially: is it different from the buggy code at
all; does the patched program compile; does it pass the developer tests;
does it pass the reference-generated tests. The furthest stage reached maps
to one of five strictly ordered reward levels, and judging stops the moment
a stage fails, which the execution counters make observable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from rrlab.corpus.types import BugSample, SemanticSample, TestCase
from rrlab.errors import RewardConfigError
from rrlab.minilang import (
    Diagnostic,
    analyze,
    canonicalize_fragment,
    compile_program,
    normalize_source,
    parse_source,
    splice,
)
from rrlab.minilang.interp import DEFAULT_STEP_BUDGET, OutcomeKind
from rrlab.tokenizer import Vocab


@dataclass(frozen=True)
class RewardConfig:
    """Five reward scaling levels.

    Domains: s0 < 0 (no-change), s0 < s1 < 0 (non-compilable),
    0 <= s2 < s3 < s4 < 1 (compilable / plausible / likely-correct).
    The ordering makes higher stages strictly better and keeps every
    reward below 1 so the loss modulator (1 - R) stays positive.
    """

    s0: float = -0.4
    s1: float = -0.2
    s2: float = 0.2
    s3: float = 0.4
    s4: float = 0.6

    def validate(self) -> None:
        if not self.s0 < 0:
            raise RewardConfigError(f"s0 must be negative, got {self.s0}")
        if not self.s1 > self.s0:
            raise RewardConfigError(f"s1 must exceed s0, got s1={self.s1} s0={self.s0}")
        if not self.s1 < 0:
            raise RewardConfigError(f"s1 must be negative, got {self.s1}")
        if not self.s2 >= 0:
            raise RewardConfigError(f"s2 must be non-negative, got {self.s2}")
        if not self.s2 < self.s3:
            raise RewardConfigError(f"s3 must exceed s2, got s3={self.s3} s2={self.s2}")
        if not self.s3 < self.s4:
            raise RewardConfigError(f"s4 must exceed s3, got s4={self.s4} s3={self.s3}")
        if not self.s4 < 1:
            raise RewardConfigError(f"s4 must be below 1, got {self.s4}")

    def values(self) -> tuple[float, float, float, float, float]:
        return (self.s0, self.s1, self.s2, self.s3, self.s4)


class Stage(enum.Enum):
    NO_CHANGE = "NoChange"
    NON_COMPILABLE = "NonCompilable"
    COMPILABLE = "Compilable"
    PLAUSIBLE = "Plausible"
    LIKELY_CORRECT = "LikelyCorrect"

    @property
    def rank(self) -> int:
        return _STAGE_ORDER.index(self)


_STAGE_ORDER = [
    Stage.NO_CHANGE,
    Stage.NON_COMPILABLE,
    Stage.COMPILABLE,
    Stage.PLAUSIBLE,
    Stage.LIKELY_CORRECT,
]


def stage_reward(stage: Stage, cfg: RewardConfig) -> float:
    return cfg.values()[stage.rank]


@dataclass(frozen=True)
class ExecCounters:
    compiles_run: int = 0
    tests_run: int = 0


@dataclass(frozen=True)
class RewardOutcome:
    reward: float
    stage: Stage
    diagnostics: tuple[Diagnostic, ...] = ()
    failed_test_index: int | None = None
    counters: ExecCounters = field(default_factory=ExecCounters)


@dataclass(frozen=True)
class PatchCandidate:
    patch_text: str
    patched_program: str


# --- individual discriminators --------------------------------------------------


def apply_patch(sample: BugSample, patch_text: str) -> PatchCandidate:
    """Splice the (whitespace-normalized) patch over the sample's hunk."""
    text = normalize_source(patch_text)
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    cleaned = "\n".join(lines)
    patched = splice(sample.buggy_program, sample.hunk_start, sample.hunk_end, cleaned)
    return PatchCandidate(patch_text=cleaned, patched_program=patched)


def difference_discriminator(buggy_text: str, patch_text: str, vocab: Vocab) -> bool:
    """True iff the patch is token-different from the buggy code."""
    return vocab.encode_text(patch_text) != vocab.encode_text(buggy_text)


def compilability_discriminator(candidate: PatchCandidate) -> tuple[bool, list[Diagnostic]]:
    diagnostics = analyze(candidate.patched_program)
    return not diagnostics, diagnostics


def _run_tests(program, tests: tuple[TestCase, ...], budget: int) -> tuple[int | None, int]:
    """Fail-fast test execution: (first failing index or None, tests executed)."""
    executed = 0
    for i, case in enumerate(tests):
        executed += 1
        outcome = program.run(case.inputs, budget)
        if outcome.kind is not OutcomeKind.RETURNED or outcome.value != case.expected:
            return i, executed
    return None, executed


def plausibility_discriminator(
    candidate: PatchCandidate, dev_tests, budget: int = DEFAULT_STEP_BUDGET
) -> tuple[bool, int | None]:
    """True iff every developer test returns its expected value."""
    program = compile_program(parse_source(candidate.patched_program))
    failed, _ = _run_tests(program, tuple(dev_tests), budget)
    return failed is None, failed


def regression_discriminator(
    candidate: PatchCandidate, rgt_tests, budget: int = DEFAULT_STEP_BUDGET
) -> tuple[bool, int | None]:
    """True iff every reference-generated test returns its expected value."""
    program = compile_program(parse_source(candidate.patched_program))
    failed, _ = _run_tests(program, tuple(rgt_tests), budget)
    return failed is None, failed


# --- the serial pipeline --------------------------------------------------------


def discriminate(
    sample: SemanticSample,
    patch_text: str,
    cfg: RewardConfig | None = None,
    budget: int = DEFAULT_STEP_BUDGET,
    vocab: Vocab | None = None,
) -> RewardOutcome:
    """Serial four-stage judgment with short-circuit; pure in its inputs.

    The difference stage compares canonicalized token text (a vocabulary is
    only needed to mirror the id-sequence comparison; canonical text equality
    is identical because encoding is injective on canonical texts)."""
    cfg = cfg or RewardConfig()
    cfg.validate()
    base = sample.base
    if vocab is not None:
        different = difference_discriminator(base.buggy_text, patch_text, vocab)
    else:
        different = canonicalize_fragment(patch_text) != canonicalize_fragment(base.buggy_text)
    if not different:
        return RewardOutcome(cfg.s0, Stage.NO_CHANGE, counters=ExecCounters(0, 0))
    candidate = apply_patch(base, patch_text)
    compilable, diagnostics = compilability_discriminator(candidate)
    if not compilable:
        return RewardOutcome(
            cfg.s1,
            Stage.NON_COMPILABLE,
            diagnostics=tuple(diagnostics),
            counters=ExecCounters(1, 0),
        )
    program = compile_program(parse_source(candidate.patched_program))
    failed_dev, ran_dev = _run_tests(program, sample.dev_tests, budget)
    if failed_dev is not None:
        return RewardOutcome(
            cfg.s2,
            Stage.COMPILABLE,
            failed_test_index=failed_dev,
            counters=ExecCounters(1, ran_dev),
        )
    failed_rgt, ran_rgt = _run_tests(program, sample.rgt_tests, budget)
    if failed_rgt is not None:
        return RewardOutcome(
            cfg.s3,
            Stage.PLAUSIBLE,
            failed_test_index=failed_rgt,
            counters=ExecCounters(1, ran_dev + ran_rgt),
        )
    return RewardOutcome(
        cfg.s4, Stage.LIKELY_CORRECT, counters=ExecCounters(1, ran_dev + ran_rgt)
    )
