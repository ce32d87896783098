"""Training orchestration.

Phase 1 (syntactic): teacher-forced cross-entropy over the bug corpus.
Phase 2 (semantic): per-sample steps where a candidate patch is decoded,
judged by the execution discriminator, and the resulting reward R rescales
the loss to (1 - R) * L before the backward pass; semantic steps alternate
with ordinary syntactic batches.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rrlab.corpus.types import BugSample, SemanticSample
from rrlab.discriminator import RewardConfig, RewardOutcome, discriminate
from rrlab.errors import (
    CheckpointVersionError,
    CorruptCheckpointError,
    InvalidConfigError,
    NonFiniteGradientError,
    VocabMismatchError,
)
from rrlab.model import (
    AdamState,
    ModelConfig,
    Parameters,
    apply_update,
    apply_update_adam,
    backward,
    beam_decode,
    forward_teacher_forced,
    greedy_decode,
)
from rrlab.tokenizer import PAD, EncodedExample, Vocab, encode_example

# --- configs --------------------------------------------------------------------


@dataclass(frozen=True)
class SyntacticTrainConfig:
    epochs: int = 15
    batch_size: int = 32
    learning_rate: float = 1e-4
    optimizer: str = "adam"  # "adam" | "plain"
    shuffle: str = "bucket"  # "bucket" (length-sorted batches, shuffled order) | "random"
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise InvalidConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidConfigError("learning rate must be positive")
        if self.batch_size < 1:
            raise InvalidConfigError("batch_size must be >= 1")
        if self.optimizer not in ("adam", "plain"):
            raise InvalidConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.shuffle not in ("bucket", "random"):
            raise InvalidConfigError(f"unknown shuffle policy {self.shuffle!r}")


@dataclass(frozen=True)
class SemanticTrainConfig:
    epochs: int = 4
    learning_rate: float = 1e-4
    optimizer: str = "adam"
    reward: RewardConfig = field(default_factory=RewardConfig)
    candidate_policy: str = "greedy"  # "greedy" | "beam_top1" | "beam_topn"
    beam_n: int = 5
    alternation_semantic: int = 1  # semantic steps per alternation group
    alternation_syntactic: int = 1  # syntactic batch updates per group (0 = pure semantic)
    syntactic_batch_size: int = 32
    step_budget: int = 10_000
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise InvalidConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidConfigError("learning rate must be positive")
        if self.optimizer not in ("adam", "plain"):
            raise InvalidConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.candidate_policy not in ("greedy", "beam_top1", "beam_topn"):
            raise InvalidConfigError(f"unknown candidate policy {self.candidate_policy!r}")
        if self.alternation_semantic < 1 or self.alternation_syntactic < 0:
            raise InvalidConfigError("alternation ratio must be >=1 semantic, >=0 syntactic")
        self.reward.validate()


@dataclass
class TrainState:
    params: Parameters
    step: int = 0
    opt: AdamState | None = None
    metrics: dict = field(default_factory=dict)


# --- batching --------------------------------------------------------------------


def encode_samples(samples, vocab: Vocab, config: ModelConfig) -> list[EncodedExample]:
    return [encode_example(s, vocab, config.max_input, config.max_target) for s in samples]


def _pad_batch(examples: list[EncodedExample]) -> tuple[np.ndarray, np.ndarray]:
    ti = max(len(e.input_ids) for e in examples)
    tt = max(len(e.target_ids) for e in examples)
    inp = np.full((len(examples), ti), PAD, dtype=np.int64)
    tgt = np.full((len(examples), tt), PAD, dtype=np.int64)
    for i, e in enumerate(examples):
        inp[i, : len(e.input_ids)] = e.input_ids
        tgt[i, : len(e.target_ids)] = e.target_ids
    return inp, tgt


def make_batches(
    encoded: list[EncodedExample], batch_size: int, shuffle: str, rng: np.random.Generator
) -> list[list[int]]:
    """Index batches for one epoch; deterministic given the rng state."""
    order = np.arange(len(encoded))
    if shuffle == "random":
        rng.shuffle(order)
        return [list(order[i : i + batch_size]) for i in range(0, len(order), batch_size)]
    # bucket: sort by length so batches pad tightly, then shuffle batch order
    keyed = sorted(order, key=lambda i: (len(encoded[i].input_ids), len(encoded[i].target_ids), i))
    batches = [keyed[i : i + batch_size] for i in range(0, len(keyed), batch_size)]
    rng.shuffle(batches)
    return [list(b) for b in batches]


# --- updates ---------------------------------------------------------------------


def _ensure_opt(state: TrainState, optimizer: str) -> None:
    if optimizer == "adam" and state.opt is None:
        state.opt = AdamState.for_params(state.params)


def _update(state: TrainState, grads, lr: float, optimizer: str) -> None:
    if optimizer == "adam":
        state.params = apply_update_adam(state.params, grads, lr, state.opt)
    else:
        state.params = apply_update(state.params, grads, lr)
    state.step += 1


def _train_batch(state: TrainState, inp, tgt, lr: float, optimizer: str, rng) -> float | None:
    """One batch update; returns the loss, or None when skipped (non-finite)."""
    res = forward_teacher_forced(state.params, inp, tgt, train=True, dropout_rng=rng)
    try:
        grads = backward(state.params, res.cache, 1.0)
        _update(state, grads, lr, optimizer)
    except NonFiniteGradientError:
        state.metrics["skipped_steps"] = state.metrics.get("skipped_steps", 0) + 1
        return None
    return res.loss


# --- phase 1: syntactic ------------------------------------------------------------


def train_syntactic(
    state: TrainState,
    samples: list[BugSample],
    vocab: Vocab,
    cfg: SyntacticTrainConfig,
) -> TrainState:
    """Cross-entropy training for cfg.epochs over the corpus; deterministic in seed."""
    cfg.validate()
    if not samples:
        raise InvalidConfigError("syntactic corpus is empty")
    _ensure_opt(state, cfg.optimizer)
    encoded = encode_samples(samples, vocab, state.params.config)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    curve = state.metrics.setdefault("syntactic_loss_curve", [])
    for _ in range(cfg.epochs):
        losses = []
        for batch in make_batches(encoded, cfg.batch_size, cfg.shuffle, rng):
            inp, tgt = _pad_batch([encoded[i] for i in batch])
            loss = _train_batch(state, inp, tgt, cfg.learning_rate, cfg.optimizer, rng)
            if loss is not None:
                losses.append(loss)
        curve.append(float(np.mean(losses)) if losses else float("nan"))
    return state


# --- phase 2: semantic --------------------------------------------------------------


def modulated_loss(loss: float, reward: float) -> float:
    """(1 - R) * L: rewards below zero amplify the loss, positive ones damp it."""
    return (1.0 - reward) * loss


def _decode_candidate(state: TrainState, input_ids, cfg: SemanticTrainConfig) -> list[int]:
    if cfg.candidate_policy == "greedy":
        return greedy_decode(state.params, input_ids)
    result = beam_decode(state.params, input_ids, 1 if cfg.candidate_policy == "beam_top1" else cfg.beam_n)
    return list(result.top())


def semantic_step(
    state: TrainState,
    sample: SemanticSample,
    vocab: Vocab,
    cfg: SemanticTrainConfig,
    candidate_text: str | None = None,
) -> tuple[TrainState, dict]:
    """One reward-modulated update.

    Decodes a candidate (unless one is replayed from an augmentation pool),
    judges it with the discriminator, computes teacher-forced cross-entropy
    against the ground-truth fix, and backpropagates (1 - R) * L."""
    cfg.validate()
    _ensure_opt(state, cfg.optimizer)
    encoded = encode_example(
        sample.base, vocab, state.params.config.max_input, state.params.config.max_target
    )
    if candidate_text is None:
        candidate_ids = _decode_candidate(state, list(encoded.input_ids), cfg)
        candidate_text = vocab.decode(candidate_ids)
    outcome: RewardOutcome = discriminate(
        sample, candidate_text, cfg.reward, cfg.step_budget, vocab=vocab
    )
    res = forward_teacher_forced(state.params, list(encoded.input_ids), list(encoded.target_ids))
    scale = 1.0 - outcome.reward
    loss_rr = modulated_loss(res.loss, outcome.reward)
    step_metrics = {
        "loss": res.loss,
        "reward": outcome.reward,
        "stage": outcome.stage.value,
        "loss_rr": loss_rr,
    }
    try:
        grads = backward(state.params, res.cache, loss_scale=scale)
        _update(state, grads, cfg.learning_rate, cfg.optimizer)
    except NonFiniteGradientError:
        state.metrics["skipped_steps"] = state.metrics.get("skipped_steps", 0) + 1
        step_metrics["skipped"] = True
    return state, step_metrics


def train_semantic(
    state: TrainState,
    semantic_samples: list[SemanticSample],
    syntactic_samples: list[BugSample],
    vocab: Vocab,
    cfg: SemanticTrainConfig,
    syntactic_cfg: SyntacticTrainConfig | None = None,
) -> TrainState:
    """Semantic epochs with interleaved syntactic batches.

    Every cfg.alternation_semantic semantic steps are followed by
    cfg.alternation_syntactic syntactic batch updates (0 = pure semantic)."""
    cfg.validate()
    _ensure_opt(state, cfg.optimizer)
    mcfg = state.params.config
    syn_shuffle = (syntactic_cfg or SyntacticTrainConfig()).shuffle
    encoded_syn = (
        encode_samples(syntactic_samples, vocab, mcfg)
        if syntactic_samples and cfg.alternation_syntactic > 0
        else []
    )
    if cfg.alternation_syntactic > 0 and not encoded_syn:
        raise InvalidConfigError("alternation requires a non-empty syntactic corpus")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    syn_batches: list[list[int]] = []
    epochs_log = state.metrics.setdefault("semantic_epochs", [])

    def next_syn_batch() -> tuple[np.ndarray, np.ndarray]:
        nonlocal syn_batches
        if not syn_batches:
            syn_batches = make_batches(
                encoded_syn, cfg.syntactic_batch_size, syn_shuffle, rng
            )
        batch = syn_batches.pop(0)
        return _pad_batch([encoded_syn[i] for i in batch])

    for _ in range(cfg.epochs):
        order = np.arange(len(semantic_samples))
        rng.shuffle(order)
        hist: dict[str, int] = {}
        losses, rewards = [], []
        pending = 0
        for idx in order:
            sample = semantic_samples[int(idx)]
            if cfg.candidate_policy == "beam_topn":
                result = beam_decode(state.params, list(
                    encode_example(sample.base, vocab, mcfg.max_input, mcfg.max_target).input_ids
                ), cfg.beam_n)
                candidates = [vocab.decode(seq) for seq, _ in result.sequences]
            else:
                candidates = [None]
            for candidate in candidates:
                state, m = semantic_step(state, sample, vocab, cfg, candidate_text=candidate)
                hist[m["stage"]] = hist.get(m["stage"], 0) + 1
                losses.append(m["loss"])
                rewards.append(m["reward"])
                pending += 1
                if cfg.alternation_syntactic > 0 and pending % cfg.alternation_semantic == 0:
                    for _ in range(cfg.alternation_syntactic):
                        _train_batch(
                            state, *next_syn_batch(), cfg.learning_rate, cfg.optimizer, rng
                        )
        epochs_log.append(
            {
                "stage_hist": hist,
                "mean_loss": float(np.mean(losses)) if losses else None,
                "mean_reward": float(np.mean(rewards)) if rewards else None,
                "semantic_steps": len(losses),
            }
        )
    return state


# --- semantic-data augmentation ------------------------------------------------------


@dataclass(frozen=True)
class PoolEntry:
    """One (sample, candidate) pair scored for replay as a semantic step."""

    sample_id: str
    candidate_ids: tuple[int, ...]
    candidate_text: str
    outcome: RewardOutcome


def augment_semantic_dataset(
    state: TrainState,
    semantic_samples: list[SemanticSample],
    vocab: Vocab,
    beam_size: int,
    reward_cfg: RewardConfig | None = None,
    step_budget: int = 10_000,
) -> list[PoolEntry]:
    """Beam-decode each sample and keep every distinct candidate with its
    judged outcome; entries replay through semantic_step(candidate_text=...)."""
    reward_cfg = reward_cfg or RewardConfig()
    mcfg = state.params.config
    pool: list[PoolEntry] = []
    seen: set[tuple[str, tuple[int, ...]]] = set()
    for sample in semantic_samples:
        encoded = encode_example(sample.base, vocab, mcfg.max_input, mcfg.max_target)
        result = beam_decode(state.params, list(encoded.input_ids), beam_size)
        for seq, _score in result.sequences:
            key = (sample.base.id, seq)
            if key in seen:
                continue
            seen.add(key)
            text = vocab.decode(seq)
            outcome = discriminate(sample, text, reward_cfg, step_budget, vocab=vocab)
            pool.append(PoolEntry(sample.base.id, seq, text, outcome))
    return pool


def replay_pool(
    state: TrainState,
    pool: list[PoolEntry],
    samples_by_id: dict[str, SemanticSample],
    vocab: Vocab,
    cfg: SemanticTrainConfig,
) -> TrainState:
    """Extra semantic steps over an augmentation pool (candidates replayed)."""
    for entry in pool:
        sample = samples_by_id[entry.sample_id]
        state, _ = semantic_step(state, sample, vocab, cfg, candidate_text=entry.candidate_text)
    return state


# --- checkpoints ----------------------------------------------------------------------

_MAGIC = b"RRCK"
_FORMAT_VERSION = 1


def save_checkpoint(
    state: TrainState,
    path: Path,
    vocab_sha256: str | None = None,
    extra_meta: dict | None = None,
) -> None:
    """Self-describing container: magic, format version, JSON header with the
    model config and array manifest, then raw little-endian array bytes."""
    arrays: dict[str, np.ndarray] = {f"param/{k}": v for k, v in state.params.arrays.items()}
    opt_meta = None
    if state.opt is not None:
        opt_meta = {
            "kind": "adam",
            "step": state.opt.step,
            "beta1": state.opt.beta1,
            "beta2": state.opt.beta2,
            "eps": state.opt.eps,
        }
        arrays.update({f"adam_m/{k}": v for k, v in state.opt.m.items()})
        arrays.update({f"adam_v/{k}": v for k, v in state.opt.v.items()})
    manifest = []
    offset = 0
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        arrays[name] = arr
        manifest.append(
            {"name": name, "dtype": str(arr.dtype), "shape": list(arr.shape), "offset": offset}
        )
        offset += arr.nbytes
    header = {
        "format_version": _FORMAT_VERSION,
        "model_config": state.params.config.to_dict(),
        "vocab_sha256": vocab_sha256,
        "step": state.step,
        "optimizer": opt_meta,
        "metrics": state.metrics,
        "arrays": manifest,
        "extra": extra_meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for arr in arrays.values():
            fh.write(arr.tobytes())


def load_checkpoint(path: Path, expect_vocab_sha256: str | None = None) -> tuple[TrainState, dict]:
    """Inverse of save_checkpoint; returns (state, header)."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 16:
        raise CorruptCheckpointError(str(path), len(data), "file shorter than fixed header")
    if data[:4] != _MAGIC:
        raise CorruptCheckpointError(str(path), 0, "bad magic (not an rrlab checkpoint)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != _FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version}, expected {_FORMAT_VERSION}"
        )
    (header_len,) = struct.unpack_from("<Q", data, 8)
    header_end = 16 + header_len
    if len(data) < header_end:
        raise CorruptCheckpointError(str(path), len(data), "truncated header")
    try:
        header = json.loads(data[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CorruptCheckpointError(str(path), 16, f"unreadable header: {err}")
    if expect_vocab_sha256 is not None and header.get("vocab_sha256") != expect_vocab_sha256:
        raise VocabMismatchError(
            f"{path}: checkpoint was trained with vocabulary "
            f"{str(header.get('vocab_sha256'))[:12]}..., expected {expect_vocab_sha256[:12]}..."
        )
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        dtype = np.dtype(entry["dtype"])
        start = header_end + entry["offset"]
        nbytes = int(np.prod(shape)) * dtype.itemsize if shape else dtype.itemsize
        end = start + nbytes
        if len(data) < end:
            raise CorruptCheckpointError(
                str(path), len(data), f"truncated array {entry['name']!r} (need {end} bytes)"
            )
        arrays[entry["name"]] = np.frombuffer(data[start:end], dtype=dtype).reshape(shape).copy()
    config = ModelConfig.from_dict(header["model_config"])
    params = Parameters(config, {k[len("param/") :]: v for k, v in arrays.items() if k.startswith("param/")})
    opt = None
    if header.get("optimizer"):
        meta = header["optimizer"]
        opt = AdamState(
            step=meta["step"],
            m={k[len("adam_m/") :]: v for k, v in arrays.items() if k.startswith("adam_m/")},
            v={k[len("adam_v/") :]: v for k, v in arrays.items() if k.startswith("adam_v/")},
            beta1=meta["beta1"],
            beta2=meta["beta2"],
            eps=meta["eps"],
        )
    state = TrainState(params=params, step=header["step"], opt=opt, metrics=header.get("metrics", {}))
    return state, header
