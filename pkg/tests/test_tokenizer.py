"""Vocabulary training, encoding, decoding, and persistence."""

import pytest

from rrlab.errors import BuggyTooLongError, UnknownIdError, VocabSizeError
from rrlab.minilang import canonicalize_fragment
from rrlab.tokenizer import (
    BOS,
    EOS,
    N_SPECIALS,
    PAD,
    SEP,
    SPECIAL_PIECES,
    UNK,
    Vocab,
    encode_example,
    split_words,
    train_vocab,
)


def _reference_bpe(texts, target_size):
    """Naive re-derivation of the merge sequence: recount every pair each
    round, straight from the definition. Oracle for train_vocab."""
    words = {}
    alphabet = set()
    for text in texts:
        canon = canonicalize_fragment(text)
        alphabet.update(canon)
        for word in split_words(canon):
            words[word] = words.get(word, 0) + 1
    segs = {w: list(w) for w in words}
    pieces = list(SPECIAL_PIECES) + sorted(alphabet)
    merges = []
    while len(pieces) < target_size:
        counts = {}
        for w, seg in segs.items():
            for i in range(len(seg) - 1):
                counts[(seg[i], seg[i + 1])] = counts.get((seg[i], seg[i + 1]), 0) + words[w]
        if not counts:
            break
        pair, count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if count < 2:
            break
        merges.append(pair)
        pieces.append(pair[0] + pair[1])
        for w, seg in segs.items():
            out = []
            i = 0
            while i < len(seg):
                if i + 1 < len(seg) and (seg[i], seg[i + 1]) == pair:
                    out.append(pair[0] + pair[1])
                    i += 2
                else:
                    out.append(seg[i])
                    i += 1
            segs[w] = out
    return pieces, merges


def test_specials_have_five_lowest_ids(small_vocab):
    assert (PAD, BOS, EOS, SEP, UNK) == (0, 1, 2, 3, 4)
    assert small_vocab.id_to_piece[:N_SPECIALS] == list(SPECIAL_PIECES)


def test_vocab_bijective(small_vocab):
    assert len(small_vocab.piece_to_id) == len(small_vocab.id_to_piece)
    for piece, idx in small_vocab.piece_to_id.items():
        assert small_vocab.id_to_piece[idx] == piece


def test_return_becomes_single_piece(small_corpus, small_vocab):
    # derived via the naive reference trainer: 'return' is frequent enough to merge fully
    texts = []
    for s in small_corpus.syntactic:
        texts += [s.buggy_text, s.context_text, s.fix_text]
    ref_pieces, ref_merges = _reference_bpe(texts, 512)
    assert "return" in ref_pieces or " return" in ref_pieces
    assert "return" in small_vocab.piece_to_id or " return" in small_vocab.piece_to_id
    assert small_vocab.id_to_piece == ref_pieces
    assert small_vocab.merges == ref_merges


def test_char_level_vocab_when_no_merge_room():
    texts = ["ab ab ab"]
    alphabet = {"a", "b", " "}
    vocab = train_vocab(texts, N_SPECIALS + len(alphabet))
    assert len(vocab) == N_SPECIALS + len(alphabet)
    assert vocab.merges == []


def test_vocab_size_too_small():
    with pytest.raises(VocabSizeError):
        train_vocab(["abcdefgh"], N_SPECIALS + 3)


def test_train_vocab_deterministic(small_corpus):
    texts = [s.fix_text for s in small_corpus.syntactic]
    assert train_vocab(texts, 128) == train_vocab(texts, 128)


def test_roundtrip_on_corpus_texts(small_corpus, small_vocab):
    for s in small_corpus.syntactic[:25]:
        for text in (s.buggy_text, s.fix_text, s.context_text):
            ids = small_vocab.encode_text(text)
            assert UNK not in ids
            assert small_vocab.decode(ids) == canonicalize_fragment(text)


def test_encoding_injective_on_canonical_texts(small_corpus, small_vocab):
    seen = {}
    for s in small_corpus.syntactic:
        canon = canonicalize_fragment(s.fix_text)
        key = tuple(small_vocab.encode_text(canon))
        if key in seen:
            assert seen[key] == canon
        seen[key] = canon


def test_unknown_character_maps_to_unk(small_vocab):
    assert UNK in small_vocab.encode_text("return é;")


def test_decode_empty_and_unknown_id(small_vocab):
    assert small_vocab.decode([]) == ""
    with pytest.raises(UnknownIdError):
        small_vocab.decode([len(small_vocab)])


def test_decode_drops_specials(small_vocab):
    ids = small_vocab.encode_text("return a;")
    assert small_vocab.decode([BOS] + ids + [EOS]) == "return a;"


def test_encode_example_structure(small_corpus, small_vocab):
    sample = small_corpus.syntactic[0]
    ex = encode_example(sample, small_vocab, max_input=256, max_target=48)
    assert list(ex.input_ids).count(SEP) == 1
    assert ex.target_ids[-1] == EOS
    assert PAD not in ex.input_ids and PAD not in ex.target_ids
    sep_at = list(ex.input_ids).index(SEP)
    assert small_vocab.decode(ex.input_ids[:sep_at]) == canonicalize_fragment(sample.buggy_text)


def test_encode_example_truncates_context_not_buggy(small_corpus, small_vocab):
    sample = small_corpus.syntactic[0]
    full = encode_example(sample, small_vocab, max_input=4096, max_target=48)
    n_buggy = list(full.input_ids).index(SEP)
    budget = n_buggy + 1 + 3  # room for only 3 context ids
    ex = encode_example(sample, small_vocab, max_input=budget, max_target=48)
    assert len(ex.input_ids) == budget
    assert list(ex.input_ids)[:n_buggy] == list(full.input_ids)[:n_buggy]


def test_encode_example_buggy_too_long(small_corpus, small_vocab):
    sample = small_corpus.syntactic[0]
    with pytest.raises(BuggyTooLongError):
        encode_example(sample, small_vocab, max_input=3, max_target=48)


def test_encode_example_target_truncation_preserves_eos(small_corpus, small_vocab):
    sample = small_corpus.syntactic[0]
    ex = encode_example(sample, small_vocab, max_input=256, max_target=4)
    assert len(ex.target_ids) <= 4
    assert ex.target_ids[-1] == EOS


def test_vocab_save_load_roundtrip(tmp_path, small_vocab):
    path = tmp_path / "vocab.txt"
    small_vocab.save(path)
    loaded = Vocab.load(path)
    assert loaded == small_vocab
    assert loaded.sha256() == small_vocab.sha256()
    text = "let x: int = -3;\nreturn x;"
    assert loaded.encode_text(text) == small_vocab.encode_text(text)


def test_vocab_file_format(tmp_path, small_vocab):
    path = tmp_path / "vocab.txt"
    small_vocab.save(path)
    lines = path.read_text().splitlines()
    assert lines[:N_SPECIALS] == list(SPECIAL_PIECES)
    assert "#merges" in lines
