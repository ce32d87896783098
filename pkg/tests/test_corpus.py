"""Program generation, bug injection, test derivation, corpus persistence."""

import json
import random

import pytest

from rrlab.corpus import (
    BugSample,
    generate_programs,
    make_dev_tests,
    make_rgt_tests,
    mutate,
    probe_points,
    read_corpus,
    read_split,
    write_corpus,
    write_split,
)
from rrlab.corpus.build import build_corpus, sanity_probe
from rrlab.corpus.mutate import find_behavior_difference
from rrlab.errors import CannotExposeBugError, NoViableMutationError, SchemaViolationError
from rrlab.minilang import check, compile_program, interpret, parse_source, render, splice
from rrlab.minilang.interp import OutcomeKind

from conftest import MAX_A_B


# --- generator -------------------------------------------------------------------


def test_generate_programs_distinct_and_checked():
    programs = generate_programs(seed=1, count=3)
    texts = {render(p) for p in programs}
    assert len(texts) == 3
    for program in programs:
        assert check(program) == []


def test_generate_programs_deterministic():
    a = [render(p) for p in generate_programs(seed=4, count=5)]
    b = [render(p) for p in generate_programs(seed=4, count=5)]
    assert a == b


def test_generate_programs_count_zero():
    assert generate_programs(seed=1, count=0) == []


def test_generated_programs_return_on_probe_input():
    for program in generate_programs(seed=12, count=10):
        outcome = interpret(program, [0] * len(program.params), 10_000)
        assert outcome.kind in (OutcomeKind.RETURNED, OutcomeKind.RUNTIME_ERROR)


# --- mutate ----------------------------------------------------------------------


def test_mutate_arith_swap_example():
    fixed = parse_source("fn main(a: int) -> int { return a * 2; }")
    sample = mutate(fixed, seed=3, sample_id="t")
    assert sample.buggy_text != sample.fix_text
    assert splice(sample.buggy_program, sample.hunk_start, sample.hunk_end, sample.fix_text) == (
        sample.fixed_program
    )


def test_mutate_cmp_swap_behavioral_difference():
    fixed = parse_source(MAX_A_B)
    found = 0
    for seed in range(12):
        sample = mutate(fixed, seed=seed, sample_id="t", require_check_clean=True)
        buggy = parse_source(sample.buggy_program)
        diff = find_behavior_difference(fixed, buggy, random.Random(0))
        assert diff is not None
        found += 1
    assert found == 12


def test_mutate_no_viable_site():
    fixed = parse_source("fn main(a: int) -> int { return 0; }")
    # constant-only program with one statement: constant perturbation is viable,
    # so build one where nothing observable exists: identity return of a param
    # still admits IdentifierMisuse -> use the error path via impossible demand
    with pytest.raises(NoViableMutationError):
        # every mutation of `return 0;` that compiles changes the constant and
        # is observable; requiring check-clean AND equivalence is impossible
        # only for an empty candidate list, so force it by mutating a program
        # whose only mutations are rejected: single `return a;` with one param
        # admits only misuse to an undefined name (not check-clean).
        mutate(
            parse_source("fn main(a: int) -> int { return a; }"),
            seed=0,
            require_check_clean=True,
        )


def test_mutate_buggy_still_parses(small_corpus):
    for sample in small_corpus.syntactic:
        parse_source(sample.buggy_program)  # must not raise


def test_mutate_deterministic():
    fixed = parse_source(MAX_A_B)
    a = mutate(fixed, seed=9, sample_id="x")
    b = mutate(fixed, seed=9, sample_id="x")
    assert a == b


def test_probe_points_shapes():
    assert probe_points(0) == [()]
    assert len(probe_points(1)) == 17
    assert len(probe_points(2)) == 17 * 17
    assert len(probe_points(3, rng=random.Random(0))) == 400
    assert all(len(p) == 3 for p in probe_points(3, rng=random.Random(0)))


# --- test derivation ---------------------------------------------------------------


def _cmp_swap_sample() -> BugSample:
    # max(a, b) with the comparison flipped: the buggy program computes min
    fixed = "fn main(a: int, b: int) -> int {\n  if a < b {\n    return b;\n  }\n  return a;\n}\n"
    buggy = fixed.replace("a < b", "a > b")
    return BugSample(
        id="max-cmp",
        fixed_program=fixed,
        buggy_program=buggy,
        hunk_start=2,
        hunk_end=2,
        buggy_text="  if a > b {",
        fix_text="  if a < b {",
        context_text="fn main(a: int, b: int) -> int {\n<HOLE>\n    return b;\n  }\n  return a;\n}",
    )


def test_make_dev_tests_exposes_cmp_swap():
    sample = _cmp_swap_sample()
    tests = make_dev_tests(sample, seed=5, k=3)
    assert len(tests) == 3
    fixed = compile_program(parse_source(sample.fixed_program))
    buggy = compile_program(parse_source(sample.buggy_program))
    # oracle: exhaustive sweep over the probe domain confirms which inputs expose
    exposing = {
        (a, b)
        for a in range(-8, 9)
        for b in range(-8, 9)
        if buggy.run((a, b)).value != fixed.run((a, b)).value
    }
    assert exposing == {(a, b) for a in range(-8, 9) for b in range(-8, 9) if a != b}
    assert any(tuple(t.inputs) in exposing for t in tests)
    for t in tests:
        assert fixed.run(t.inputs).value == t.expected


def test_make_dev_tests_k1_is_exposing():
    sample = _cmp_swap_sample()
    (test,) = make_dev_tests(sample, seed=1, k=1)
    buggy = compile_program(parse_source(sample.buggy_program))
    assert buggy.run(test.inputs).value != test.expected


def test_make_dev_tests_unexposable_bug():
    fixed = "fn main(a: int) -> int {\n  return a;\n}\n"
    sample = BugSample(
        id="equiv",
        fixed_program=fixed,
        buggy_program="fn main(a: int) -> int {\n  return a + 0;\n}\n",
        hunk_start=2,
        hunk_end=2,
        buggy_text="  return a + 0;",
        fix_text="  return a;",
        context_text="fn main(a: int) -> int {\n<HOLE>\n}",
    )
    with pytest.raises(CannotExposeBugError):
        make_dev_tests(sample, seed=0, k=2)


def test_make_rgt_tests_expected_from_interpreter():
    fixed = parse_source("fn main(a: int, b: int) -> int { return a + b; }")
    tests = make_rgt_tests(fixed, seed=2, k=8)
    assert len(tests) == 8
    for t in tests:
        assert t.expected == t.inputs[0] + t.inputs[1]


def test_make_rgt_tests_deterministic_and_k0():
    fixed = parse_source(MAX_A_B)
    assert make_rgt_tests(fixed, seed=3, k=4) == make_rgt_tests(fixed, seed=3, k=4)
    assert make_rgt_tests(fixed, seed=3, k=0) == []


# --- build ---------------------------------------------------------------------------


def test_build_corpus_exact_sizes(small_corpus):
    assert len(small_corpus.syntactic) == 60
    assert len(small_corpus.semantic) == 10
    assert len(small_corpus.test) == 10


def test_build_corpus_splits_disjoint(small_corpus):
    fixed = [s.fixed_program for s in small_corpus.syntactic]
    fixed += [s.base.fixed_program for s in small_corpus.semantic]
    fixed += [s.base.fixed_program for s in small_corpus.test]
    assert len(fixed) == len(set(fixed))


def test_build_corpus_invariants(small_corpus):
    sanity_probe(small_corpus)
    for sem in list(small_corpus.semantic) + list(small_corpus.test):
        base = sem.base
        assert check(parse_source(base.fixed_program)) == []
        assert check(parse_source(base.buggy_program)) == []
        assert len(sem.dev_tests) == 4 and len(sem.rgt_tests) == 16
        buggy = compile_program(parse_source(base.buggy_program))
        failures = [
            t
            for t in sem.dev_tests
            if (out := buggy.run(t.inputs, 10_000)).kind is not OutcomeKind.RETURNED
            or out.value != t.expected
        ]
        assert failures, f"{base.id}: no dev test exposes the bug"


def test_build_corpus_no_sample_where_buggy_equals_fix(small_corpus):
    for sample in small_corpus.syntactic:
        assert sample.buggy_text != sample.fix_text
    for sem in list(small_corpus.semantic) + list(small_corpus.test):
        assert sem.base.buggy_text != sem.base.fix_text


def test_build_corpus_deterministic():
    a = build_corpus(seed=55, n_syntactic=8, n_semantic=2, n_test=2)
    b = build_corpus(seed=55, n_syntactic=8, n_semantic=2, n_test=2)
    assert a == b


# --- persistence ----------------------------------------------------------------------


def test_corpus_roundtrip(tmp_path, small_corpus):
    write_corpus(tmp_path, small_corpus)
    again = read_corpus(tmp_path)
    assert again == small_corpus


def test_corpus_files_byte_identical_on_rewrite(tmp_path, small_corpus):
    write_corpus(tmp_path / "a", small_corpus)
    write_corpus(tmp_path / "b", small_corpus)
    for name in ("syntactic.jsonl", "semantic.jsonl", "test.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_read_split_truncated_line(tmp_path, small_corpus):
    path = tmp_path / "syntactic.jsonl"
    write_split(path, small_corpus.manifest, small_corpus.syntactic[:3], "syntactic")
    lines = path.read_text().splitlines()
    lines[2] = lines[2][: len(lines[2]) // 2]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaViolationError) as err:
        read_split(path, with_tests=False)
    assert err.value.line_no == 3


def test_read_split_missing_field(tmp_path, small_corpus):
    path = tmp_path / "s.jsonl"
    write_split(path, small_corpus.manifest, small_corpus.syntactic[:1], "syntactic")
    lines = path.read_text().splitlines()
    obj = json.loads(lines[1])
    del obj["fix_text"]
    lines[1] = json.dumps(obj)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaViolationError, match="fix_text"):
        read_split(path, with_tests=False)


def test_read_split_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    manifest, samples = read_split(path)
    assert manifest is None and samples == []
