"""Whitespace-canonical text handling for program fragments.

Hunk texts, patch texts, and model outputs are compared and encoded in a
canonical form: one statementish line per line, tokens joined with the same
spacing rules the renderer uses, no leading indentation. The fragment lexer
never fails; alien characters become single-character tokens so arbitrary
model output can still be canonicalized and compared.
"""

from __future__ import annotations

from rrlab.minilang.lexer import KEYWORDS, TWO_CHAR_OPS, normalize_source

HOLE_MARKER = "<HOLE>"

_NO_SPACE_BEFORE = frozenset([";", ",", ")", ":"])


def _is_word(tok: str) -> bool:
    return bool(tok) and (tok[0].isalpha() or tok[0] == "_")


def _ends_value(tok: str) -> bool:
    """Whether a '-' after this token is binary (else unary)."""
    if tok == ")" or tok in ("true", "false"):
        return True
    if tok[0].isdigit():
        return True
    return _is_word(tok) and tok not in KEYWORDS


def join_tokens(tokens: list[str]) -> str:
    """Canonical single-line rendering of a token sequence."""
    out: list[str] = []
    prev: str | None = None
    glue_next = False  # previous token was a unary minus or '('
    for tok in tokens:
        if prev is None or glue_next:
            sep = ""
        elif tok in _NO_SPACE_BEFORE:
            sep = ""
        elif tok == "(" and _is_word(prev) and prev not in KEYWORDS:
            sep = ""  # call-style parenthesis, e.g. main(
        else:
            sep = " "
        out.append(sep)
        out.append(tok)
        unary_minus = tok == "-" and (prev is None or glue_next or not _ends_value(prev))
        glue_next = unary_minus or tok == "("
        prev = tok
    return "".join(out)


def fragment_tokens(line: str) -> list[str]:
    """Tokenize one line permissively: MiniLang tokens where possible,
    single characters otherwise. Never raises."""
    tokens: list[str] = []
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c in " \t":
            i += 1
            continue
        if line.startswith(HOLE_MARKER, i):
            tokens.append(HOLE_MARKER)
            i += len(HOLE_MARKER)
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (line[j].isalnum() or line[j] == "_"):
                j += 1
            tokens.append(line[i:j])
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and line[j].isdigit():
                j += 1
            tokens.append(line[i:j])
            i = j
            continue
        if line[i : i + 2] in TWO_CHAR_OPS:
            tokens.append(line[i : i + 2])
            i += 2
            continue
        tokens.append(c)
        i += 1
    return tokens


def canonicalize_fragment(text: str) -> str:
    """Normalize a multi-line fragment: canonical token spacing per line,
    indentation and blank lines dropped. Joined with LF, no trailing newline."""
    lines = []
    for raw in normalize_source(text).split("\n"):
        tokens = fragment_tokens(raw)
        if tokens:
            lines.append(join_tokens(tokens))
    return "\n".join(lines)


def splice(program: str, hunk_start: int, hunk_end: int, replacement: str) -> str:
    """Replace lines [hunk_start, hunk_end] (1-based, inclusive) of a program
    with the replacement text's lines. An empty replacement deletes the hunk.
    The program keeps its trailing newline."""
    lines = program.splitlines()
    if not (1 <= hunk_start and hunk_start - 1 <= hunk_end <= len(lines)):
        raise ValueError(f"hunk ({hunk_start}, {hunk_end}) out of range for {len(lines)} lines")
    new_lines = replacement.splitlines() if replacement else []
    spliced = lines[: hunk_start - 1] + new_lines + lines[hunk_end:]
    return "\n".join(spliced) + "\n" if spliced else ""


def hunk_text(program: str, hunk_start: int, hunk_end: int) -> str:
    """Extract lines [hunk_start, hunk_end] (1-based, inclusive) without a
    trailing newline."""
    lines = program.splitlines()
    return "\n".join(lines[hunk_start - 1 : hunk_end])
