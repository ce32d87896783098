"""Inference and measurement: top-n patch generation, top-k compilable rates,
plausibility / reference-test-correct / exact-match repair counts, compile
error categorization, and the syntactic-vs-semantic ablation.

Evaluation never mutates model state; reruns on the same checkpoint and test
set are bit-identical, and per-bug work may run on a thread pool because
every operation here is pure.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from rrlab.corpus.types import BugSample, SemanticSample
from rrlab.discriminator import RewardConfig, Stage, apply_patch, discriminate
from rrlab.errors import ConfigMismatchError
from rrlab.minilang import analyze, canonicalize_fragment
from rrlab.tokenizer import Vocab, encode_example
from rrlab.training import TrainState
from rrlab.model import beam_decode


@dataclass(frozen=True)
class InferenceRequest:
    """Hunk location is known: perfect-fault-localization mode."""

    sample: BugSample
    beam_size: int = 10
    max_target: int | None = None


@dataclass(frozen=True)
class RankedPatch:
    text: str
    log_score: float


@dataclass
class EvalReport:
    n_bugs: int
    beam_size: int
    compilable_rates: dict[int, float]  # k -> mean top-k compilable fraction
    plausible: int
    rgt_correct: int
    exact_match: int
    no_change_top1: int  # bugs whose rank-1 patch is token-identical to the buggy code
    error_histogram: list[tuple[str, int]]  # category -> count, descending
    per_bug: list[dict] = field(default_factory=list)

    def validate(self) -> None:
        assert 0 <= self.exact_match <= self.rgt_correct <= self.plausible <= self.n_bugs
        assert all(0.0 <= r <= 1.0 for r in self.compilable_rates.values())

    @property
    def no_change_top1_fraction(self) -> float:
        return self.no_change_top1 / self.n_bugs if self.n_bugs else 0.0


def infer(state: TrainState, vocab: Vocab, request: InferenceRequest) -> list[RankedPatch]:
    """Ranked candidate patch texts for one bug."""
    cfg = state.params.config
    encoded = encode_example(request.sample, vocab, cfg.max_input, cfg.max_target)
    result = beam_decode(
        state.params, list(encoded.input_ids), request.beam_size, request.max_target
    )
    return [RankedPatch(vocab.decode(seq), score) for seq, score in result.sequences]


def _map_bugs(fn, bugs, threads: int):
    if threads <= 1:
        return [fn(b) for b in bugs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, bugs))  # map preserves order -> deterministic merge


def compilable_rate(
    state: TrainState,
    bugs: list[BugSample],
    ks: list[int],
    vocab: Vocab,
    beam_size: int | None = None,
    threads: int = 1,
) -> dict[int, float]:
    """Mean over bugs of the fraction of top-k patches whose patched program
    passes the checker; k beyond the candidate count uses what is available."""
    ks = sorted(ks)
    beam = beam_size or max(ks)

    def one(bug: BugSample) -> dict[int, float]:
        patches = infer(state, vocab, InferenceRequest(bug, beam))
        flags = [not analyze(apply_patch(bug, p.text).patched_program) for p in patches]
        rates = {}
        for k in ks:
            top = flags[: min(k, len(flags))]
            rates[k] = sum(top) / len(top) if top else 0.0
        return rates

    per_bug = _map_bugs(one, bugs, threads)
    return {k: sum(r[k] for r in per_bug) / len(per_bug) if per_bug else 0.0 for k in ks}


def repair_rate(
    state: TrainState,
    test_set: list[SemanticSample],
    vocab: Vocab,
    beam_size: int = 10,
    reward_cfg: RewardConfig | None = None,
    step_budget: int = 10_000,
    threads: int = 1,
    ks: list[int] | None = None,
) -> EvalReport:
    """Full evaluation over a semantic test set.

    A bug counts as plausible if any top-beam patch reaches at least the
    Plausible stage, rgt_correct if any reaches LikelyCorrect, exact_match if
    any patch text canonically equals the ground-truth fix."""
    reward_cfg = reward_cfg or RewardConfig()
    ks = sorted(ks) if ks else [1, 5, beam_size]

    def one(sem: SemanticSample) -> dict:
        bug = sem.base
        patches = infer(state, vocab, InferenceRequest(bug, beam_size))
        fix_canon = canonicalize_fragment(bug.fix_text)
        best_stage = None
        exact = False
        compile_flags = []
        errors = []
        for patch in patches:
            outcome = discriminate(sem, patch.text, reward_cfg, step_budget)
            if best_stage is None or outcome.stage.rank > best_stage.rank:
                best_stage = outcome.stage
            if outcome.stage is Stage.NO_CHANGE:
                # echoing the buggy hunk still yields the (compilable) buggy program
                diags = analyze(apply_patch(bug, patch.text).patched_program)
                compiles = not diags
            elif outcome.stage is Stage.NON_COMPILABLE:
                diags = list(outcome.diagnostics)
                compiles = False
            else:
                diags = []
                compiles = True
            compile_flags.append(compiles)
            if not compiles and diags:
                errors.append(diags[0].category.value)  # first error per patch only
            if not exact and canonicalize_fragment(patch.text) == fix_canon:
                exact = True
        top1_no_change = bool(patches) and (
            canonicalize_fragment(patches[0].text) == canonicalize_fragment(bug.buggy_text)
        )
        return {
            "id": bug.id,
            "best_stage": best_stage.value if best_stage else None,
            "plausible": best_stage is not None and best_stage.rank >= Stage.PLAUSIBLE.rank,
            "rgt_correct": best_stage is Stage.LIKELY_CORRECT,
            "exact": exact,
            "top1_no_change": top1_no_change,
            "top1_text": patches[0].text if patches else "",
            "compile_flags": compile_flags,
            "errors": errors,
        }

    rows = _map_bugs(one, test_set, threads)
    histogram: dict[str, int] = {}
    for row in rows:
        for category in row["errors"]:
            histogram[category] = histogram.get(category, 0) + 1
    rates = {}
    for k in ks:
        per_bug = []
        for row in rows:
            top = row["compile_flags"][: min(k, len(row["compile_flags"]))]
            per_bug.append(sum(top) / len(top) if top else 0.0)
        rates[k] = sum(per_bug) / len(per_bug) if per_bug else 0.0
    report = EvalReport(
        n_bugs=len(rows),
        beam_size=beam_size,
        compilable_rates=rates,
        plausible=sum(r["plausible"] for r in rows),
        rgt_correct=sum(r["rgt_correct"] for r in rows),
        exact_match=sum(r["exact"] for r in rows),
        no_change_top1=sum(r["top1_no_change"] for r in rows),
        error_histogram=sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0])),
        per_bug=rows,
    )
    report.validate()
    return report


def categorize_errors(
    state: TrainState,
    bugs: list[BugSample],
    k: int,
    vocab: Vocab,
    threads: int = 1,
) -> list[tuple[str, int]]:
    """First-diagnostic category histogram over uncompilable top-k patches,
    sorted by descending count (category name breaks ties)."""

    def one(bug: BugSample) -> list[str]:
        patches = infer(state, vocab, InferenceRequest(bug, k))
        cats = []
        for patch in patches[:k]:
            diags = analyze(apply_patch(bug, patch.text).patched_program)
            if diags:
                cats.append(diags[0].category.value)
        return cats

    histogram: dict[str, int] = {}
    for cats in _map_bugs(one, bugs, threads):
        for category in cats:
            histogram[category] = histogram.get(category, 0) + 1
    return sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass
class AblationReport:
    baseline: EvalReport
    full: EvalReport

    def rows(self) -> list[tuple[str, float, float, float]]:
        out = []
        for k in sorted(self.baseline.compilable_rates):
            b = self.baseline.compilable_rates[k]
            f = self.full.compilable_rates.get(k, 0.0)
            out.append((f"compilable_rate_top{k}", b, f, f - b))
        for name in ("plausible", "rgt_correct", "exact_match", "no_change_top1"):
            b = float(getattr(self.baseline, name))
            f = float(getattr(self.full, name))
            out.append((name, b, f, f - b))
        out.append(
            (
                "no_change_top1_fraction",
                self.baseline.no_change_top1_fraction,
                self.full.no_change_top1_fraction,
                self.full.no_change_top1_fraction - self.baseline.no_change_top1_fraction,
            )
        )
        return out


def ablate(
    state_syntactic_only: TrainState,
    state_full: TrainState,
    test_set: list[SemanticSample],
    vocab: Vocab,
    beam_size: int = 10,
    ks: list[int] | None = None,
    reward_cfg: RewardConfig | None = None,
    step_budget: int = 10_000,
    threads: int = 1,
) -> AblationReport:
    """Side-by-side evaluation of two states on identical inputs."""
    if state_syntactic_only.params.config != state_full.params.config:
        raise ConfigMismatchError("ablation states differ in model config")
    kwargs = dict(
        vocab=vocab,
        beam_size=beam_size,
        reward_cfg=reward_cfg,
        step_budget=step_budget,
        threads=threads,
        ks=ks,
    )
    return AblationReport(
        baseline=repair_rate(state_syntactic_only, test_set, **kwargs),
        full=repair_rate(state_full, test_set, **kwargs),
    )


# --- report output ---------------------------------------------------------------


def write_compilable_csv(path: Path, rates: dict[int, float], n_bugs: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "compilable_rate", "n_bugs"])
        for k in sorted(rates):
            w.writerow([k, f"{rates[k]:.6f}", n_bugs])


def write_repair_csv(path: Path, report: EvalReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "value"])
        w.writerow(["n_bugs", report.n_bugs])
        w.writerow(["beam_size", report.beam_size])
        w.writerow(["plausible", report.plausible])
        w.writerow(["rgt_correct", report.rgt_correct])
        w.writerow(["exact_match", report.exact_match])
        w.writerow(["no_change_top1", report.no_change_top1])
        w.writerow(["no_change_top1_fraction", f"{report.no_change_top1_fraction:.6f}"])


def write_histogram_csv(path: Path, histogram: list[tuple[str, int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["category", "count"])
        for category, count in histogram:
            w.writerow([category, count])


def write_ablation_csv(path: Path, report: AblationReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "baseline", "full", "delta"])
        for name, b, f, d in report.rows():
            w.writerow([name, f"{b:.6f}", f"{f:.6f}", f"{d:.6f}"])


def format_report(report: EvalReport) -> str:
    lines = [
        f"bugs evaluated      : {report.n_bugs}",
        f"beam size           : {report.beam_size}",
    ]
    for k in sorted(report.compilable_rates):
        lines.append(f"compilable top-{k:<4}: {report.compilable_rates[k]*100:.1f}%")
    lines += [
        f"plausible           : {report.plausible}",
        f"rgt-correct         : {report.rgt_correct}",
        f"exact match         : {report.exact_match}",
        f"no-change top-1     : {report.no_change_top1} ({report.no_change_top1_fraction*100:.1f}%)",
    ]
    if report.error_histogram:
        lines.append("compile errors (first per patch):")
        for category, count in report.error_histogram:
            lines.append(f"  {category:<22} {count}")
    return "\n".join(lines)
