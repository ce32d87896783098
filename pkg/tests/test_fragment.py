"""Canonical fragment text, hunk splicing, line-diff extraction."""

import pytest

from rrlab.corpus.mutate import line_hunk, make_context
from rrlab.minilang import (
    HOLE_MARKER,
    canonicalize_fragment,
    fragment_tokens,
    hunk_text,
    join_tokens,
    splice,
)


def test_canonicalize_strips_indent_and_spacing():
    assert canonicalize_fragment("   return   a+1 ;") == "return a + 1;"


def test_canonicalize_is_idempotent():
    texts = ["let x: int = -1;", "if a<=b {", "x = (a*2)%3;", "return a;\nreturn b;"]
    for text in texts:
        once = canonicalize_fragment(text)
        assert canonicalize_fragment(once) == once


def test_canonicalize_drops_blank_lines_and_tabs():
    assert canonicalize_fragment("\ta = 1;\n\n\n  b = 2;\r\n") == "a = 1;\nb = 2;"


def test_canonicalize_never_fails_on_garbage():
    assert canonicalize_fragment("@@ return $$ ???") == "@ @ return $ $ ? ? ?"


def test_hole_marker_is_one_token():
    assert fragment_tokens("  <HOLE>") == [HOLE_MARKER]
    assert canonicalize_fragment("   <HOLE>") == HOLE_MARKER


def test_join_unary_minus():
    assert join_tokens(["x", "=", "-", "1", ";"]) == "x = -1;"
    assert join_tokens(["x", "=", "a", "-", "1", ";"]) == "x = a - 1;"
    assert join_tokens(["return", "-", "a", ";"]) == "return -a;"


def test_join_call_style_parens():
    assert join_tokens(["fn", "main", "(", "a", ":", "int", ")", "->", "int", "{"]) == (
        "fn main(a: int) -> int {"
    )


def test_splice_replaces_hunk():
    program = "fn main(a: int) -> int {\n  return a;\n}\n"
    assert splice(program, 2, 2, "  return a + 1;") == (
        "fn main(a: int) -> int {\n  return a + 1;\n}\n"
    )


def test_splice_empty_replacement_deletes():
    program = "a\nb\nc\n"
    assert splice(program, 2, 2, "") == "a\nc\n"


def test_splice_multi_line_into_single_hunk():
    program = "a\nb\nc\n"
    assert splice(program, 2, 2, "x\ny") == "a\nx\ny\nc\n"


def test_splice_rejects_bad_range():
    with pytest.raises(ValueError):
        splice("a\nb\n", 5, 6, "x")


def test_hunk_text_inverse_of_splice():
    program = "l1\nl2\nl3\nl4\n"
    assert hunk_text(program, 2, 3) == "l2\nl3"
    assert splice(program, 2, 3, hunk_text(program, 2, 3)) == program


def test_line_hunk_substitution():
    fixed = "a\nb\nc\n"
    buggy = "a\nB\nc\n"
    start, end, fix_text = line_hunk(fixed, buggy)
    assert (start, end) == (2, 2)
    assert fix_text == "b"
    assert splice(buggy, start, end, fix_text) == fixed


def test_line_hunk_deletion_widens_to_neighbor():
    fixed = "a\nb\nc\nd\n"
    buggy = "a\nc\nd\n"  # 'b' deleted
    start, end, fix_text = line_hunk(fixed, buggy)
    assert end >= start  # never an empty buggy hunk
    assert splice(buggy, start, end, fix_text) == fixed
    assert hunk_text(buggy, start, end) != fix_text


def test_line_hunk_deletion_at_end():
    fixed = "a\nb\nc\n"
    buggy = "a\nb\n"
    start, end, fix_text = line_hunk(fixed, buggy)
    assert splice(buggy, start, end, fix_text) == fixed


def test_make_context_single_hole():
    buggy = "l1\nl2\nl3\n"
    context = make_context(buggy, 2, 2)
    assert context.split("\n") == ["l1", HOLE_MARKER, "l3"]
    assert context.count(HOLE_MARKER) == 1
