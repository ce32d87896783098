"""Lexer, parser, checker, interpreter, and renderer behavior."""

import random

import pytest

from rrlab.corpus import generate_programs
from rrlab.minilang import (
    Category,
    LangError,
    analyze,
    check,
    interpret,
    interpret_reference,
    lex,
    parse,
    parse_source,
    render,
)
from rrlab.minilang.interp import InterpreterError, OutcomeKind, RuntimeFault
from rrlab.minilang.lexer import TokenKind

from conftest import MAX_A_B


# --- lexer ---------------------------------------------------------------------


def test_lex_simple_statement():
    tokens = lex("return a + 1;")
    assert [t.text for t in tokens] == ["return", "a", "+", "1", ";"]
    assert [t.kind for t in tokens] == [
        TokenKind.KEYWORD,
        TokenKind.IDENT,
        TokenKind.OP,
        TokenKind.INT,
        TokenKind.OP,
    ]


def test_lex_empty_input():
    assert lex("") == []


def test_lex_illegal_character():
    with pytest.raises(LangError) as err:
        lex("return a $ 1;")
    diag = err.value.diagnostic
    assert diag.category is Category.SYNTAX_ERROR
    assert diag.span.start == 9 and diag.span.end == 10


def test_lex_two_char_operators():
    tokens = lex("a<=b >= c == d != e -> f")
    assert [t.text for t in tokens] == ["a", "<=", "b", ">=", "c", "==", "d", "!=", "e", "->", "f"]


def test_lex_roundtrip_through_lexemes():
    source = "fn main(a: int) -> int { return a * 2; }"
    tokens = lex(source)
    rebuilt = " ".join(t.text for t in tokens)
    assert [t.text for t in lex(rebuilt)] == [t.text for t in tokens]


# --- parser --------------------------------------------------------------------


def test_parse_return_program():
    program = parse_source("fn main(a: int) -> int { return a; }")
    assert len(program.params) == 1
    assert len(program.body.stmts) == 1


def test_parse_if_then_return():
    program = parse_source("fn main(a: int) -> int { if a < 0 { return 0; } return a; }")
    assert len(program.body.stmts) == 2


def test_parse_error_in_expression():
    with pytest.raises(LangError) as err:
        parse_source("fn main(a: int) -> int { a + ; }")
    assert err.value.diagnostic.category is Category.SYNTAX_ERROR


def test_parse_not_a_statement():
    with pytest.raises(LangError) as err:
        parse_source("fn main(a: int) -> int { a + 1; return a; }")
    assert err.value.diagnostic.category is Category.NOT_A_STATEMENT


def test_parse_rejects_trailing_tokens():
    with pytest.raises(LangError):
        parse_source("fn main(a: int) -> int { return a; } fn")


def test_parse_requires_main():
    with pytest.raises(LangError):
        parse_source("fn other(a: int) -> int { return a; }")


def test_parse_precedence():
    program = parse_source("fn main(a: int) -> int { return a + 2 * 3; }")
    ret = program.body.stmts[0]
    assert ret.value.op == "+" and ret.value.right.op == "*"


# --- checker -------------------------------------------------------------------


def test_check_undefined_identifier():
    diags = analyze("fn main(a: int) -> int { return d; }")
    assert [d.category for d in diags] == [Category.UNDEFINED_IDENTIFIER]
    assert "d" in diags[0].message


def test_check_type_mismatch_let():
    diags = analyze("fn main(a: int) -> int { let x: int = true; return x; }")
    assert [d.category for d in diags] == [Category.TYPE_MISMATCH]


def test_check_well_formed_max():
    assert analyze(MAX_A_B) == []


def test_check_missing_return():
    diags = analyze("fn main(a: int) -> int { if a < 0 { return 0; } }")
    assert [d.category for d in diags] == [Category.MISSING_RETURN]


def test_check_if_else_both_return_is_complete():
    assert analyze("fn main(a: int) -> int { if a < 0 { return 0; } else { return a; } }") == []


def test_check_duplicate_definition():
    diags = analyze("fn main(a: int) -> int { let a: int = 1; return a; }")
    assert [d.category for d in diags] == [Category.DUPLICATE_DEFINITION]


def test_check_condition_must_be_bool():
    diags = analyze("fn main(a: int) -> int { if a { return 0; } return a; }")
    assert [d.category for d in diags] == [Category.TYPE_MISMATCH]


def test_check_block_scoping():
    source = "fn main(a: int) -> int { if a < 0 { let x: int = 1; } return x; }"
    diags = analyze(source)
    assert [d.category for d in diags] == [Category.UNDEFINED_IDENTIFIER]


def test_check_diagnostics_ordered_by_span():
    source = "fn main(a: int) -> int { let x: int = d; y = 2; return x; }"
    diags = analyze(source)
    assert len(diags) >= 2
    spans = [d.span.start for d in diags]
    assert spans == sorted(spans)


# --- interpreter ----------------------------------------------------------------


def test_interpret_max_program():
    program = parse_source(MAX_A_B)
    assert interpret(program, [3, 5]).value == 5
    assert interpret(program, [7, 5]).value == 7


def test_interpret_budget_exhausted():
    program = parse_source("fn main(a: int) -> int { while true { } return a; }")
    # 'while true' parses and checks fine; it must hit the budget
    outcome = interpret(program, [1], 1000)
    assert outcome.kind is OutcomeKind.BUDGET_EXHAUSTED
    assert outcome.steps_used <= 1000


def test_interpret_div_by_zero():
    program = parse_source("fn main(a: int, b: int) -> int { return a / b; }")
    outcome = interpret(program, [1, 0])
    assert outcome.kind is OutcomeKind.RUNTIME_ERROR
    assert outcome.fault is RuntimeFault.DIV_BY_ZERO
    outcome = interpret(program, [1, 2])
    assert outcome.value == 0


def test_interpret_mod_by_zero():
    program = parse_source("fn main(a: int) -> int { return a % 0; }")
    assert interpret(program, [5]).fault is RuntimeFault.MOD_BY_ZERO


def test_interpret_arity_check():
    program = parse_source(MAX_A_B)
    with pytest.raises(InterpreterError):
        interpret(program, [1])


def test_interpret_determinism_100_runs():
    program = parse_source(MAX_A_B)
    outcomes = {interpret(program, [4, 9], 10_000) for _ in range(100)}
    assert len(outcomes) == 1


def test_interpret_budget_monotonicity():
    program = parse_source(
        "fn main(a: int) -> int { let i: int = 0; while i < 5 { a = a + i; i = i + 1; } return a; }"
    )
    base = interpret(program, [3], 120)
    assert base.kind is OutcomeKind.RETURNED
    for budget in (121, 200, 500, 10_000):
        again = interpret(program, [3], budget)
        assert again.kind is OutcomeKind.RETURNED
        assert again.value == base.value and again.steps_used == base.steps_used


def test_interpret_matches_reference_on_generated_programs():
    rng = random.Random(5)
    for program in generate_programs(21, 25):
        for _ in range(4):
            inputs = [rng.randint(-8, 8) for _ in program.params]
            fast = interpret(program, inputs, 10_000)
            slow = interpret_reference(program, inputs, 10_000)
            assert (fast.kind, fast.value, fast.fault, fast.steps_used) == (
                slow.kind,
                slow.value,
                slow.fault,
                slow.steps_used,
            )


def test_interpret_wrapping_arithmetic():
    program = parse_source(
        "fn main(a: int) -> int { let i: int = 0; while i < 40 { a = a * a + 1; i = i + 1; } return a; }"
    )
    outcome = interpret(program, [7], 10_000)
    # squaring 40 times wraps mod 2^64 instead of growing unboundedly
    assert outcome.kind is OutcomeKind.RETURNED
    assert -(2**63) <= outcome.value < 2**63


# --- renderer --------------------------------------------------------------------


def test_render_canonical_return():
    program = parse_source("fn  main( a:int )->int {  return a ; }")
    assert render(program) == "fn main(a: int) -> int {\n  return a;\n}\n"


def test_render_parse_roundtrip_on_generated(small_corpus):
    for sample in small_corpus.syntactic[:30]:
        program = parse_source(sample.fixed_program)
        assert parse_source(render(program)) == program
        assert render(parse_source(render(program))) == render(program)


def test_render_idempotent_through_parse():
    source = "fn main(a: int, b: int) -> int { return (a + b) * -2; }"
    once = render(parse_source(source))
    assert render(parse_source(once)) == once


def test_render_structural_equality_gives_identical_text():
    a = parse_source("fn main(a: int) -> int { return a + 1; }")
    b = parse_source("fn main( a : int ) -> int {\n\n  return a   + 1; }")
    assert a == b
    assert render(a) == render(b)


def test_corpus_roundtrip_property(small_corpus):
    # parse(lex(render(parse(lex(p))))) structurally equals parse(lex(p))
    for sample in small_corpus.syntactic:
        for text in (sample.fixed_program, sample.buggy_program):
            program = parse_source(text)
            assert parse_source(render(program)) == program


def test_check_soundness_for_interpreter(small_corpus):
    # check-clean programs only ever return, fault on div/mod zero, or time out
    rng = random.Random(11)
    for sample in small_corpus.semantic:
        program = parse_source(sample.base.buggy_program)
        assert check(program) == []
        for _ in range(5):
            inputs = [rng.randint(-8, 8) for _ in program.params]
            outcome = interpret(program, inputs, 2_000)
            assert outcome.kind in (
                OutcomeKind.RETURNED,
                OutcomeKind.RUNTIME_ERROR,
                OutcomeKind.BUDGET_EXHAUSTED,
            )


def test_parse_tokens_entrypoint():
    tokens = lex("fn main(a: int) -> int { return a; }")
    program = parse(tokens)
    assert render(program) == "fn main(a: int) -> int {\n  return a;\n}\n"
