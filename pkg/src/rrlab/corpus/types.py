"""Corpus record types: bug samples, test cases, split container."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from rrlab.minilang import hunk_text, splice


class MutationKind(enum.Enum):
    ARITH_OP_SWAP = "ArithOpSwap"
    CMP_OP_SWAP = "CmpOpSwap"
    CONST_PERTURB = "ConstPerturb"
    IDENTIFIER_MISUSE = "IdentifierMisuse"
    NEGATE_CONDITION = "NegateCondition"
    DELETE_STATEMENT = "DeleteStatement"
    OFF_BY_ONE = "OffByOne"


@dataclass(frozen=True)
class BugSample:
    """One single-hunk bug.

    Invariants: buggy_text != fix_text; the fixed program checks clean; and
    splicing fix_text over the hunk of buggy_program reproduces fixed_program
    byte-for-byte.
    """

    id: str
    fixed_program: str
    buggy_program: str
    hunk_start: int  # 1-based, inclusive, into buggy_program
    hunk_end: int
    buggy_text: str
    fix_text: str
    context_text: str

    def validate(self) -> None:
        if self.buggy_text == self.fix_text:
            raise ValueError(f"{self.id}: buggy_text equals fix_text")
        if hunk_text(self.buggy_program, self.hunk_start, self.hunk_end) != self.buggy_text:
            raise ValueError(f"{self.id}: hunk range does not match buggy_text")
        if splice(self.buggy_program, self.hunk_start, self.hunk_end, self.fix_text) != self.fixed_program:
            raise ValueError(f"{self.id}: splice(buggy, hunk, fix) != fixed")


@dataclass(frozen=True)
class TestCase:
    """Inputs plus the value the fixed program returns on them."""

    inputs: tuple[int, ...]
    expected: int


@dataclass(frozen=True)
class SemanticSample:
    """A bug sample with developer tests and reference-generated tests."""

    base: BugSample
    dev_tests: tuple[TestCase, ...]
    rgt_tests: tuple[TestCase, ...]


@dataclass(frozen=True)
class SizeConfig:
    """Bounds for random program generation."""

    min_params: int = 1
    max_params: int = 3
    min_stmts: int = 2
    max_stmts: int = 5
    max_depth: int = 2
    max_expr_depth: int = 2


@dataclass(frozen=True)
class CorpusManifest:
    seed: int
    n_syntactic: int
    n_semantic: int
    n_test: int
    size: SizeConfig = field(default_factory=SizeConfig)
    dev_tests: int = 4
    rgt_tests: int = 16
    step_budget: int = 10_000
    probe_bound: int = 8  # probe inputs drawn from [-bound, bound] per parameter
    format_version: int = 1


@dataclass
class Corpus:
    manifest: CorpusManifest
    syntactic: list[BugSample]
    semantic: list[SemanticSample]
    test: list[SemanticSample]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            self.manifest == other.manifest
            and self.syntactic == other.syntactic
            and self.semantic == other.semantic
            and self.test == other.test
        )
