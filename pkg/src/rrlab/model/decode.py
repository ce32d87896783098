"""Greedy and beam decoding.

Scores are summed token log-probabilities with no length normalization.
Ties break deterministically: lower token id first, then lexicographic
sequence order. A sequence is complete when it emits EOS or reaches
max_target tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rrlab.model.net import encode_input, next_token_logprobs
from rrlab.model.params import Parameters
from rrlab.tokenizer import EOS


@dataclass(frozen=True)
class DecodeResult:
    """Ranked (ids, log_score) pairs, best first; scores non-increasing."""

    sequences: tuple[tuple[tuple[int, ...], float], ...]

    def top(self) -> tuple[int, ...]:
        return self.sequences[0][0]


def greedy_decode(params: Parameters, input_ids, max_target: int | None = None) -> list[int]:
    """Emit the argmax token each step (lowest id on ties) until EOS/limit."""
    max_target = max_target or params.config.max_target
    enc_out, enc_mask = encode_input(params, input_ids)
    emitted: list[int] = []
    for _ in range(max_target):
        prefix = np.asarray([emitted], dtype=np.int64)
        logp = next_token_logprobs(params, enc_out, enc_mask, prefix)[0]
        token = int(np.argmax(logp))  # argmax returns the lowest index on ties
        emitted.append(token)
        if token == EOS:
            break
    return emitted


def beam_decode(
    params: Parameters, input_ids, beam_size: int, max_target: int | None = None
) -> DecodeResult:
    """Standard beam search over summed log-probabilities."""
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    max_target = max_target or params.config.max_target
    enc_out, enc_mask = encode_input(params, input_ids)
    live: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
    finished: list[tuple[tuple[int, ...], float]] = []
    for _ in range(max_target):
        if not live:
            break
        prefixes = np.asarray([seq for seq, _ in live], dtype=np.int64).reshape(len(live), -1)
        logp = next_token_logprobs(params, enc_out, enc_mask, prefixes)
        candidates = []
        for (seq, score), row in zip(live, logp):
            for token, token_logp in enumerate(row):
                candidates.append((seq + (token,), score + float(token_logp)))
        candidates.sort(key=lambda c: (-c[1], c[0]))
        kept = candidates[:beam_size]
        live = []
        for seq, score in kept:
            if seq[-1] == EOS:
                finished.append((seq, score))
            else:
                live.append((seq, score))
    finished.extend(live)  # length-capped sequences count as complete
    finished.sort(key=lambda c: (-c[1], c[0]))
    return DecodeResult(tuple(finished[:beam_size]))
