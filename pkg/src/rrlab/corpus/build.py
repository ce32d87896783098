"""Corpus assembly: programs -> bugs -> tests -> splits.

Splits are disjoint by underlying fixed program. The syntactic split may
contain bugs that do not compile; the semantic and test splits require the
buggy program to compile and its developer tests to run.
"""

from __future__ import annotations

import random

from rrlab.corpus.generator import next_program
from rrlab.corpus.mutate import mutate
from rrlab.corpus.testgen import make_dev_tests, make_rgt_tests
from rrlab.corpus.types import BugSample, Corpus, CorpusManifest, SemanticSample, SizeConfig
from rrlab.errors import CannotExposeBugError, GenerationExhaustedError, NoViableMutationError
from rrlab.minilang import interpret, parse_source
from rrlab.minilang.interp import OutcomeKind

MAX_CONSECUTIVE_REJECTS = 1000


def build_corpus(
    seed: int,
    n_syntactic: int,
    n_semantic: int,
    n_test: int,
    size_cfg: SizeConfig | None = None,
    dev_tests: int = 4,
    rgt_tests: int = 16,
    step_budget: int = 10_000,
) -> Corpus:
    """Deterministic in seed; split sizes are exact."""
    cfg = size_cfg or SizeConfig()
    manifest = CorpusManifest(
        seed=seed,
        n_syntactic=n_syntactic,
        n_semantic=n_semantic,
        n_test=n_test,
        size=cfg,
        dev_tests=dev_tests,
        rgt_tests=rgt_tests,
        step_budget=step_budget,
    )
    master = random.Random(seed)
    gen_rng = random.Random(master.randrange(2**63))
    mut_seed_rng = random.Random(master.randrange(2**63))
    test_seed_rng = random.Random(master.randrange(2**63))
    seen: set[str] = set()

    def next_syntactic(index: int) -> BugSample:
        rejects = 0
        while True:
            program = next_program(gen_rng, cfg, seen)
            try:
                return mutate(
                    program,
                    mut_seed_rng.randrange(2**63),
                    sample_id=f"syn-{index:05d}",
                    budget=step_budget,
                )
            except NoViableMutationError:
                rejects += 1
                if rejects >= MAX_CONSECUTIVE_REJECTS:
                    raise GenerationExhaustedError("cannot find mutable programs")

    def next_semantic(prefix: str, index: int) -> SemanticSample:
        rejects = 0
        while True:
            program = next_program(gen_rng, cfg, seen)
            try:
                base = mutate(
                    program,
                    mut_seed_rng.randrange(2**63),
                    sample_id=f"{prefix}-{index:05d}",
                    require_check_clean=True,
                    budget=step_budget,
                )
                dev = make_dev_tests(base, test_seed_rng.randrange(2**63), dev_tests, step_budget)
                rgt = make_rgt_tests(
                    parse_source(base.fixed_program),
                    test_seed_rng.randrange(2**63),
                    rgt_tests,
                    step_budget,
                )
                return SemanticSample(base, tuple(dev), tuple(rgt))
            except (NoViableMutationError, CannotExposeBugError):
                rejects += 1
                if rejects >= MAX_CONSECUTIVE_REJECTS:
                    raise GenerationExhaustedError("cannot derive semantic samples")

    syntactic = [next_syntactic(i) for i in range(n_syntactic)]
    semantic = [next_semantic("sem", i) for i in range(n_semantic)]
    test = [next_semantic("test", i) for i in range(n_test)]
    return Corpus(manifest, syntactic, semantic, test)


def sanity_probe(corpus: Corpus) -> None:
    """Cheap structural re-validation used by tests and the CLI."""
    from rrlab.minilang import compile_program

    for sample in corpus.syntactic:
        sample.validate()
    for sem in list(corpus.semantic) + list(corpus.test):
        sem.base.validate()
        fixed = compile_program(parse_source(sem.base.fixed_program))
        for case in list(sem.dev_tests) + list(sem.rgt_tests):
            outcome = fixed.run(case.inputs, corpus.manifest.step_budget)
            if outcome.kind is not OutcomeKind.RETURNED or outcome.value != case.expected:
                raise AssertionError(f"{sem.base.id}: test does not pass on fixed program")
