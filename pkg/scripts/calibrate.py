"""Reference-config calibration: run the full pipeline at one setting and
print the ablation numbers the acceptance criteria gate on."""

import argparse
import json
import sys
import time
from pathlib import Path

from rrlab.config import LabConfig
from rrlab.corpus import build_corpus, write_corpus, read_split
from rrlab.evaluate import ablate
from rrlab.model import init
from rrlab.tokenizer import train_vocab
from rrlab.training import TrainState, train_semantic, train_syntactic


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--sizes", default="2000,100,100")
    ap.add_argument("--syn-epochs", type=int, default=15)
    ap.add_argument("--sem-epochs", type=int, default=4)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--sem-lr", type=float, default=None)
    ap.add_argument("--beam", type=int, default=10)
    ap.add_argument("--policy", default="greedy")
    args = ap.parse_args()
    n_syn, n_sem, n_test = (int(x) for x in args.sizes.split(","))

    t0 = time.time()
    args.out.mkdir(parents=True, exist_ok=True)
    corpus_dir = args.out / "corpus"
    if (corpus_dir / "syntactic.jsonl").exists():
        _, syn = read_split(corpus_dir / "syntactic.jsonl", with_tests=False)
        _, sem = read_split(corpus_dir / "semantic.jsonl", with_tests=True)
        _, test = read_split(corpus_dir / "test.jsonl", with_tests=True)
    else:
        corpus = build_corpus(args.seed, n_syn, n_sem, n_test)
        write_corpus(corpus_dir, corpus)
        syn, sem, test = corpus.syntactic, corpus.semantic, corpus.test
    print(f"[{time.time()-t0:6.1f}s] corpus ready ({len(syn)}/{len(sem)}/{len(test)})", flush=True)

    texts = []
    for s in syn:
        texts += [s.buggy_text, s.context_text, s.fix_text]
    vocab = train_vocab(texts, 512)
    print(f"[{time.time()-t0:6.1f}s] vocab {len(vocab)}", flush=True)

    cfg = LabConfig()
    cfg.override("syntactic", "epochs", args.syn_epochs)
    cfg.override("syntactic", "learning_rate", args.lr)
    cfg.override("semantic", "epochs", args.sem_epochs)
    cfg.override("semantic", "learning_rate", args.sem_lr or args.lr)
    cfg.override("semantic", "candidate_policy", args.policy)
    mcfg = cfg.model_config(len(vocab))
    state = TrainState(params=init(mcfg))
    state = train_syntactic(state, syn, vocab, cfg.syntactic_config())
    curve = state.metrics["syntactic_loss_curve"]
    print(f"[{time.time()-t0:6.1f}s] syntactic loss curve: "
          + " ".join(f"{x:.3f}" for x in curve), flush=True)

    import copy
    baseline = TrainState(params=state.params, step=state.step, opt=None,
                          metrics=json.loads(json.dumps(state.metrics)))
    full = train_semantic(TrainState(params=state.params, step=state.step,
                                     opt=copy.deepcopy(state.opt),
                                     metrics=json.loads(json.dumps(state.metrics))),
                          sem, syn, vocab, cfg.semantic_config())
    for i, ep in enumerate(full.metrics["semantic_epochs"]):
        print(f"  sem epoch {i}: {ep['stage_hist']} mean_loss={ep['mean_loss']:.3f}", flush=True)
    print(f"[{time.time()-t0:6.1f}s] semantic done", flush=True)

    report = ablate(baseline, full, test, vocab, beam_size=args.beam, ks=[1, 5, 10])
    for name, b, f, d in report.rows():
        print(f"{name:<28} baseline={b:.4f} full={f:.4f} delta={d:+.4f}", flush=True)
    print(f"[{time.time()-t0:6.1f}s] TOTAL", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
