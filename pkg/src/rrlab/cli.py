"""Single executable for the whole pipeline.

Exit codes: 0 success, 1 domain error, 2 usage error. Data goes to stdout or
files; progress and diagnostics go to stderr so CSV pipes stay clean.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from rrlab import __version__
from rrlab.config import LabConfig, file_sha256, write_run_manifest
from rrlab.corpus import build_corpus, read_split, write_corpus
from rrlab.errors import RRLabError
from rrlab.evaluate import (
    InferenceRequest,
    ablate,
    format_report,
    infer,
    repair_rate,
    write_ablation_csv,
    write_compilable_csv,
    write_histogram_csv,
    write_repair_csv,
)
from rrlab.model import ModelConfig, backward, forward_teacher_forced, init
from rrlab.tokenizer import Vocab, train_vocab
from rrlab.training import (
    TrainState,
    augment_semantic_dataset,
    load_checkpoint,
    replay_pool,
    save_checkpoint,
    train_semantic,
    train_syntactic,
)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("RRLAB_THREADS", "1")))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="global config file (INI)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for evaluation (default: $RRLAB_THREADS or 1)")


# --- commands -------------------------------------------------------------------


def cmd_gen_corpus(args) -> int:
    cfg = LabConfig.load(args.config)
    for key, value in (("seed", args.seed), ("syntactic", args.syntactic),
                       ("semantic", args.semantic), ("test", args.test)):
        cfg.override("corpus", key, value)
    kv = cfg.values["corpus"]
    _log(f"generating corpus seed={kv['seed']} "
         f"({kv['syntactic']}/{kv['semantic']}/{kv['test']}) ...")
    corpus = build_corpus(
        seed=kv["seed"],
        n_syntactic=kv["syntactic"],
        n_semantic=kv["semantic"],
        n_test=kv["test"],
        size_cfg=cfg.size_config(),
        dev_tests=kv["dev_tests"],
        rgt_tests=kv["rgt_tests"],
        step_budget=kv["step_budget"],
    )
    out = Path(args.out)
    write_corpus(out, corpus)
    write_run_manifest(
        out / "run-manifest.json", "gen-corpus", cfg,
        inputs={},
        extra={"seed": kv["seed"],
               "sizes": {"syntactic": kv["syntactic"], "semantic": kv["semantic"], "test": kv["test"]},
               "outputs": {name: file_sha256(out / f"{name}.jsonl")
                           for name in ("syntactic", "semantic", "test")}},
    )
    _log(f"wrote {out}/{{syntactic,semantic,test}}.jsonl")
    return 0


def cmd_train_vocab(args) -> int:
    cfg = LabConfig.load(args.config)
    cfg.override("tokenizer", "vocab_size", args.size)
    _, samples = read_split(args.corpus, with_tests=None)
    texts: list[str] = []
    for sample in samples:
        base = getattr(sample, "base", sample)
        texts.extend([base.buggy_text, base.context_text, base.fix_text])
    vocab = train_vocab(texts, cfg.values["tokenizer"]["vocab_size"])
    vocab.save(args.out)
    write_run_manifest(
        Path(str(args.out) + ".run-manifest.json"), "train-vocab", cfg,
        inputs={"corpus": args.corpus},
        extra={"vocab_sha256": vocab.sha256(), "vocab_size": len(vocab)},
    )
    _log(f"trained vocabulary of {len(vocab)} pieces -> {args.out}")
    return 0


def cmd_train_syntactic(args) -> int:
    cfg = LabConfig.load(args.config)
    for key, value in (("epochs", args.epochs), ("batch_size", args.batch_size),
                       ("learning_rate", args.lr), ("seed", args.seed),
                       ("optimizer", args.optimizer)):
        cfg.override("syntactic", key, value)
    vocab = Vocab.load(args.vocab)
    _, samples = read_split(args.corpus, with_tests=False)
    model_cfg = cfg.model_config(len(vocab))
    if args.init_from:
        state, _ = load_checkpoint(args.init_from, expect_vocab_sha256=vocab.sha256())
    else:
        state = TrainState(params=init(model_cfg))
    scfg = cfg.syntactic_config()
    _log(f"syntactic training: {len(samples)} samples, {scfg.epochs} epochs ...")
    state = train_syntactic(state, samples, vocab, scfg)
    save_checkpoint(state, args.out, vocab_sha256=vocab.sha256(),
                    extra_meta={"phase": "syntactic"})
    write_run_manifest(
        Path(str(args.out) + ".run-manifest.json"), "train-syntactic", cfg,
        inputs={"corpus": args.corpus, "vocab": args.vocab},
        extra={"final_loss": state.metrics["syntactic_loss_curve"][-1],
               "steps": state.step},
    )
    _log(f"final epoch mean loss {state.metrics['syntactic_loss_curve'][-1]:.4f} -> {args.out}")
    return 0


def cmd_train_semantic(args) -> int:
    cfg = LabConfig.load(args.config)
    for key, value in (("epochs", args.epochs), ("learning_rate", args.lr),
                       ("seed", args.seed), ("candidate_policy", args.candidate_policy)):
        cfg.override("semantic", key, value)
    vocab = Vocab.load(args.vocab)
    state, _ = load_checkpoint(args.ckpt, expect_vocab_sha256=vocab.sha256())
    _, semantic_samples = read_split(args.semantic, with_tests=True)
    _, syntactic_samples = read_split(args.syntactic, with_tests=False)
    semcfg = cfg.semantic_config()
    _log(f"semantic training: {len(semantic_samples)} samples, {semcfg.epochs} epochs ...")
    state = train_semantic(state, semantic_samples, syntactic_samples, vocab, semcfg)
    if args.augment_beam:
        _log(f"augmenting with beam {args.augment_beam} and replaying the pool ...")
        pool = augment_semantic_dataset(
            state, semantic_samples, vocab, args.augment_beam,
            semcfg.reward, semcfg.step_budget,
        )
        by_id = {s.base.id: s for s in semantic_samples}
        state = replay_pool(state, pool, by_id, vocab, semcfg)
    save_checkpoint(state, args.out, vocab_sha256=vocab.sha256(),
                    extra_meta={"phase": "semantic"})
    last = state.metrics["semantic_epochs"][-1]
    write_run_manifest(
        Path(str(args.out) + ".run-manifest.json"), "train-semantic", cfg,
        inputs={"ckpt": args.ckpt, "semantic": args.semantic,
                "syntactic": args.syntactic, "vocab": args.vocab},
        extra={"last_epoch": last, "steps": state.step},
    )
    _log(f"stage histogram (last epoch): {last['stage_hist']} -> {args.out}")
    return 0


def cmd_infer(args) -> int:
    vocab = Vocab.load(args.vocab)
    state, _ = load_checkpoint(args.ckpt, expect_vocab_sha256=vocab.sha256())
    _, samples = read_split(args.samples, with_tests=None)
    chosen = []
    for sample in samples:
        base = getattr(sample, "base", sample)
        if args.id is None or base.id == args.id:
            chosen.append(base)
    if args.id is not None and not chosen:
        raise RRLabError(f"sample id {args.id!r} not found in {args.samples}")
    for base in chosen[: args.limit]:
        patches = infer(state, vocab, InferenceRequest(base, args.beam))
        print(f"# {base.id}")
        for rank, patch in enumerate(patches, start=1):
            text = patch.text.replace("\n", "\\n")
            print(f"{rank}\t{patch.log_score:.4f}\t{text}")
    return 0


def cmd_eval(args) -> int:
    cfg = LabConfig.load(args.config)
    cfg.override("eval", "beam", args.beam)
    if args.ks:
        cfg.override("eval", "ks", args.ks)
    vocab = Vocab.load(args.vocab)
    state, _ = load_checkpoint(args.ckpt, expect_vocab_sha256=vocab.sha256())
    _, test_set = read_split(args.test, with_tests=True)
    ks = cfg.eval_ks()
    beam = cfg.values["eval"]["beam"]
    _log(f"evaluating {len(test_set)} bugs, beam {beam}, ks {ks} ...")
    report = repair_rate(
        state, test_set, vocab, beam_size=beam, reward_cfg=cfg.reward_config(),
        step_budget=cfg.values["eval"]["step_budget"], threads=_threads(args), ks=ks,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_compilable_csv(out_dir / "compilable_rate.csv", report.compilable_rates, report.n_bugs)
    write_repair_csv(out_dir / "repair_counts.csv", report)
    write_histogram_csv(out_dir / "error_histogram.csv", report.error_histogram)
    write_run_manifest(
        out_dir / "run-manifest.json", "eval", cfg,
        inputs={"ckpt": args.ckpt, "test": args.test, "vocab": args.vocab},
        extra={"beam": beam, "ks": ks},
    )
    print(format_report(report))
    return 0


def cmd_ablate(args) -> int:
    cfg = LabConfig.load(args.config)
    cfg.override("eval", "beam", args.beam)
    if args.ks:
        cfg.override("eval", "ks", args.ks)
    vocab = Vocab.load(args.vocab)
    baseline, _ = load_checkpoint(args.baseline, expect_vocab_sha256=vocab.sha256())
    full, _ = load_checkpoint(args.full, expect_vocab_sha256=vocab.sha256())
    _, test_set = read_split(args.test, with_tests=True)
    ks = cfg.eval_ks()
    beam = cfg.values["eval"]["beam"]
    _log(f"ablation over {len(test_set)} bugs, beam {beam} ...")
    report = ablate(
        baseline, full, test_set, vocab, beam_size=beam, ks=ks,
        reward_cfg=cfg.reward_config(), step_budget=cfg.values["eval"]["step_budget"],
        threads=_threads(args),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_ablation_csv(out_dir / "ablation.csv", report)
    write_run_manifest(
        out_dir / "ablation-run-manifest.json", "ablate", cfg,
        inputs={"baseline": args.baseline, "full": args.full,
                "test": args.test, "vocab": args.vocab},
        extra={"beam": beam, "ks": ks},
    )
    for name, b, f, d in report.rows():
        print(f"{name:<28} baseline={b:.4f} full={f:.4f} delta={d:+.4f}")
    return 0


def cmd_grad_check(args) -> int:
    tolerance = 1e-3
    cfg = ModelConfig(
        vocab_size=20, d_model=8, n_heads=2, n_layers_enc=1, n_layers_dec=1,
        d_ff=16, max_input=16, max_target=10, seed=args.seed,
    )
    params = init(cfg)
    rng = np.random.default_rng(args.seed)
    eps = 1e-4
    worst = 0.0
    for _ in range(args.examples):
        inp = rng.integers(5, cfg.vocab_size, size=int(rng.integers(4, 10)))
        tgt = np.concatenate([rng.integers(5, cfg.vocab_size, size=int(rng.integers(2, 6))), [2]])
        res = forward_teacher_forced(params, inp, tgt)
        grads = backward(params, res.cache, 1.0)
        for name, arr in params.arrays.items():
            flat = arr.ravel()
            g = grads[name].ravel()
            for j in range(flat.size):
                original = float(flat[j])
                losses = []
                for sign in (1.0, -1.0):
                    trial = {k: v.copy() for k, v in params.arrays.items()}
                    trial[name].ravel()[j] = original + sign * eps
                    from rrlab.model.params import Parameters

                    losses.append(forward_teacher_forced(Parameters(cfg, trial), inp, tgt).loss)
                fd = (losses[0] - losses[1]) / (2 * eps)
                rel = abs(fd - g[j]) / max(abs(fd), abs(g[j]), 1e-8)
                worst = max(worst, rel)
    print(f"max relative error: {worst:.3e} (tolerance {tolerance:.0e})")
    return 0 if worst < tolerance else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrlab",
        description="Desk-scale neural program repair with execution-guided training.",
    )
    parser.add_argument("--version", action="version", version=f"rrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate the bug corpus splits")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--syntactic", type=int, default=None)
    p.add_argument("--semantic", type=int, default=None)
    p.add_argument("--test", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_gen_corpus)

    p = sub.add_parser("train-vocab", help="learn the subword vocabulary")
    p.add_argument("--corpus", type=Path, required=True, help="split file (.jsonl)")
    p.add_argument("--out", type=Path, required=True, help="vocabulary file")
    p.add_argument("--size", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_train_vocab)

    p = sub.add_parser("train-syntactic", help="phase 1: cross-entropy training")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="checkpoint path")
    p.add_argument("--init-from", type=Path, default=None, help="resume from checkpoint")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--optimizer", choices=("adam", "plain"), default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_train_syntactic)

    p = sub.add_parser("train-semantic", help="phase 2: reward-modulated training")
    p.add_argument("--ckpt", type=Path, required=True, help="syntactically trained checkpoint")
    p.add_argument("--semantic", type=Path, required=True, help="semantic split (.jsonl)")
    p.add_argument("--syntactic", type=Path, required=True, help="syntactic split for alternation")
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--candidate-policy", dest="candidate_policy",
                   choices=("greedy", "beam_top1", "beam_topn"), default=None)
    p.add_argument("--augment-beam", type=int, default=0,
                   help="after training, score beam candidates and replay them once")
    _add_common(p)
    p.set_defaults(fn=cmd_train_semantic)

    p = sub.add_parser("infer", help="generate ranked patches for bugs")
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--samples", type=Path, required=True, help="split file (.jsonl)")
    p.add_argument("--id", default=None, help="only this sample id")
    p.add_argument("--limit", type=int, default=10, help="max bugs to decode")
    p.add_argument("--beam", type=int, default=10)
    _add_common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a test split")
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True)
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--ks", default=None, help="comma-separated k values")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="compare syntactic-only and full checkpoints")
    p.add_argument("--baseline", type=Path, required=True)
    p.add_argument("--full", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True)
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--ks", default=None)
    p.add_argument("--out-dir", type=Path, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("grad-check", help="finite-difference gradient self-check")
    p.add_argument("--examples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(fn=cmd_grad_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RRLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
