"""Subword vocabulary over MiniLang source.

Greedy byte-pair merges learned from corpus texts: start from characters,
repeatedly merge the most frequent adjacent pair (ties broken by
lexicographic piece order). Merges stay within "words" (identifier, number,
operator run, or whitespace run with its leading space attached to the
following word), which keeps encoding fast and pieces local.

Encoding canonicalizes text first, so whitespace-only variants share one id
sequence; decode concatenates pieces, hence decode(encode(x)) ==
canonicalize(x).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

from rrlab.errors import BuggyTooLongError, RRLabError, UnknownIdError, VocabSizeError
from rrlab.minilang import canonicalize_fragment

PAD, BOS, EOS, SEP, UNK = 0, 1, 2, 3, 4
SPECIAL_PIECES = ("<pad>", "<s>", "</s>", "<sep>", "<unk>")
N_SPECIALS = len(SPECIAL_PIECES)

# identifiers/keywords, numbers, operator runs; a single leading space joins
# the following word (GPT-style) so frequent " return"-like pieces can form.
_WORD_RE = re.compile(r" ?[A-Za-z_][A-Za-z0-9_]*| ?[0-9]+| ?[^\sA-Za-z0-9_]+|\n| +")


def split_words(text: str) -> list[str]:
    return _WORD_RE.findall(text)


@dataclass
class Vocab:
    """Immutable after training; encode/decode are pure."""

    id_to_piece: list[str]
    merges: list[tuple[str, str]]
    piece_to_id: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.piece_to_id:
            self.piece_to_id = {p: i for i, p in enumerate(self.id_to_piece)}
        if len(self.piece_to_id) != len(self.id_to_piece):
            raise RRLabError("vocabulary pieces are not unique")
        self._rank = {pair: r for r, pair in enumerate(self.merges)}
        self._word_cache: dict[str, list[int]] = {}

    def __len__(self) -> int:
        return len(self.id_to_piece)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocab):
            return NotImplemented
        return self.id_to_piece == other.id_to_piece and self.merges == other.merges

    # --- encoding -------------------------------------------------------------

    def _encode_word(self, word: str) -> list[int]:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        parts = list(word)
        while len(parts) > 1:
            best_rank = None
            best_i = -1
            for i in range(len(parts) - 1):
                rank = self._rank.get((parts[i], parts[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_i = i
            if best_rank is None:
                break
            parts[best_i : best_i + 2] = [parts[best_i] + parts[best_i + 1]]
        ids = [self.piece_to_id.get(p, UNK) for p in parts]
        self._word_cache[word] = ids
        return ids

    def encode_text(self, text: str) -> list[int]:
        """Canonicalize, then encode. Unknown characters map to UNK."""
        ids: list[int] = []
        for word in split_words(canonicalize_fragment(text)):
            ids.extend(self._encode_word(word))
        return ids

    def decode(self, ids) -> str:
        """Drop specials, concatenate pieces."""
        pieces = []
        for i in ids:
            i = int(i)
            if i < 0 or i >= len(self.id_to_piece):
                raise UnknownIdError(f"id {i} outside vocabulary of size {len(self.id_to_piece)}")
            if i < N_SPECIALS:
                continue
            pieces.append(self.id_to_piece[i])
        return "".join(pieces)

    # --- persistence ----------------------------------------------------------

    def dumps(self) -> str:
        lines = [p for p in SPECIAL_PIECES]
        lines.extend(_escape(p) for p in self.id_to_piece[N_SPECIALS:])
        lines.append("#merges")
        lines.extend(f"{_escape(a)}\t{_escape(b)}" for a, b in self.merges)
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def save(self, path: Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @staticmethod
    def load(path: Path) -> "Vocab":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if lines[:N_SPECIALS] != list(SPECIAL_PIECES):
            raise RRLabError(f"{path}: missing {N_SPECIALS}-line specials header")
        try:
            split = lines.index("#merges")
        except ValueError:
            raise RRLabError(f"{path}: missing #merges section")
        pieces = list(SPECIAL_PIECES) + [_unescape(l) for l in lines[N_SPECIALS:split]]
        merges = []
        for line in lines[split + 1 :]:
            a, _, b = line.partition("\t")
            merges.append((_unescape(a), _unescape(b)))
        return Vocab(pieces, merges)


def _escape(piece: str) -> str:
    return piece.encode("unicode_escape").decode("ascii")


def _unescape(text: str) -> str:
    return text.encode("ascii").decode("unicode_escape")


def train_vocab(corpus_texts: list[str], target_size: int = 512) -> Vocab:
    """Learn merges until the vocabulary reaches target_size or no adjacent
    pair repeats. Deterministic in its inputs."""
    words: dict[str, int] = {}
    alphabet: set[str] = set()
    for text in corpus_texts:
        canon = canonicalize_fragment(text)
        alphabet.update(canon)
        for word in split_words(canon):
            words[word] = words.get(word, 0) + 1
    if target_size < N_SPECIALS + 1 or len(alphabet) > target_size - N_SPECIALS:
        raise VocabSizeError(
            f"target size {target_size} cannot hold {N_SPECIALS} specials "
            f"plus alphabet of {len(alphabet)}"
        )
    pieces = list(SPECIAL_PIECES) + sorted(alphabet)
    merges: list[tuple[str, str]] = []
    # word -> current segmentation
    segs: dict[str, list[str]] = {w: list(w) for w in words}
    while len(pieces) < target_size:
        counts: dict[tuple[str, str], int] = {}
        for word, seg in segs.items():
            n = words[word]
            for i in range(len(seg) - 1):
                pair = (seg[i], seg[i + 1])
                counts[pair] = counts.get(pair, 0) + n
        if not counts:
            break
        # most frequent pair; ties go to the lexicographically smallest pair
        pair, count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if count < 2:
            break
        merged = pair[0] + pair[1]
        if merged in SPECIAL_PIECES:  # cannot happen for MiniLang text; stay safe
            break
        merges.append(pair)
        pieces.append(merged)
        for word, seg in segs.items():
            i = 0
            while i < len(seg) - 1:
                if seg[i] == pair[0] and seg[i + 1] == pair[1]:
                    seg[i : i + 2] = [merged]
                else:
                    i += 1
    return Vocab(pieces, merges)


# --- model examples -----------------------------------------------------------


@dataclass(frozen=True)
class EncodedExample:
    """input = buggy SEP context (context truncated to fit);
    target = fix EOS (pieces truncated, EOS preserved)."""

    input_ids: tuple[int, ...]
    target_ids: tuple[int, ...]


def encode_example(sample, vocab: Vocab, max_input: int, max_target: int) -> EncodedExample:
    buggy = vocab.encode_text(sample.buggy_text)
    if len(buggy) > max_input - 2:
        raise BuggyTooLongError(
            f"{sample.id}: buggy text is {len(buggy)} ids, budget {max_input - 2}"
        )
    context = vocab.encode_text(sample.context_text)
    room = max_input - len(buggy) - 1
    input_ids = buggy + [SEP] + context[:room]
    fix = vocab.encode_text(sample.fix_text)
    target_ids = fix[: max_target - 1] + [EOS]
    return EncodedExample(tuple(input_ids), tuple(target_ids))
