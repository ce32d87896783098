"""Line-oriented corpus persistence.

Each split lives in one .jsonl file whose first line is a corpus-manifest
record (seed and config for provenance); every following line is one
self-contained sample object. read(write(c)) == c field-for-field.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from rrlab.corpus.types import BugSample, Corpus, CorpusManifest, SemanticSample, SizeConfig
from rrlab.errors import SchemaViolationError

SPLIT_FILES = {"syntactic": "syntactic.jsonl", "semantic": "semantic.jsonl", "test": "test.jsonl"}

_BUG_FIELDS = [
    "id",
    "fixed_program",
    "buggy_program",
    "hunk_start",
    "hunk_end",
    "buggy_text",
    "fix_text",
    "context_text",
]


def _bug_to_obj(sample: BugSample) -> dict:
    return {name: getattr(sample, name) for name in _BUG_FIELDS}


def _sem_to_obj(sample: SemanticSample) -> dict:
    obj = _bug_to_obj(sample.base)
    obj["dev_tests"] = [{"inputs": list(t.inputs), "expected": t.expected} for t in sample.dev_tests]
    obj["rgt_tests"] = [{"inputs": list(t.inputs), "expected": t.expected} for t in sample.rgt_tests]
    return obj


def _require(obj: dict, field: str, kind: type, path: str, line_no: int):
    if field not in obj:
        raise SchemaViolationError(path, line_no, f"missing field {field!r}")
    value = obj[field]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaViolationError(path, line_no, f"field {field!r} must be {kind.__name__}")
    return value


def _bug_from_obj(obj: dict, path: str, line_no: int) -> BugSample:
    kwargs = {}
    for name in _BUG_FIELDS:
        kind = int if name in ("hunk_start", "hunk_end") else str
        kwargs[name] = _require(obj, name, kind, path, line_no)
    sample = BugSample(**kwargs)
    try:
        sample.validate()
    except ValueError as err:
        raise SchemaViolationError(path, line_no, str(err))
    return sample


def _tests_from_obj(obj: dict, field: str, path: str, line_no: int):
    from rrlab.corpus.types import TestCase

    raw = _require(obj, field, list, path, line_no)
    tests = []
    for entry in raw:
        if not isinstance(entry, dict) or "inputs" not in entry or "expected" not in entry:
            raise SchemaViolationError(path, line_no, f"malformed test case in {field!r}")
        tests.append(TestCase(tuple(int(v) for v in entry["inputs"]), int(entry["expected"])))
    return tuple(tests)


def _manifest_to_obj(manifest: CorpusManifest, split: str, count: int) -> dict:
    obj = dataclasses.asdict(manifest)
    obj["size"] = dataclasses.asdict(manifest.size)
    return {"corpus_manifest": obj, "split": split, "count": count}


def _manifest_from_obj(obj: dict, path: str, line_no: int) -> CorpusManifest:
    if "corpus_manifest" not in obj:
        raise SchemaViolationError(path, line_no, "first line must be a corpus_manifest record")
    raw = dict(obj["corpus_manifest"])
    try:
        raw["size"] = SizeConfig(**raw["size"])
        return CorpusManifest(**raw)
    except (KeyError, TypeError) as err:
        raise SchemaViolationError(path, line_no, f"bad manifest: {err}")


def write_split(path: Path, manifest: CorpusManifest, samples, split: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(_manifest_to_obj(manifest, split, len(samples)), sort_keys=True) + "\n")
        for sample in samples:
            obj = _sem_to_obj(sample) if isinstance(sample, SemanticSample) else _bug_to_obj(sample)
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def read_split(path: Path, with_tests: bool | None = None):
    """Read one split file -> (manifest | None, samples).

    with_tests selects the record type; None auto-detects per record.
    An empty file yields (None, [])."""
    path = Path(path)
    manifest = None
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise SchemaViolationError(str(path), line_no, f"invalid JSON: {err.msg}")
            if not isinstance(obj, dict):
                raise SchemaViolationError(str(path), line_no, "record must be an object")
            if line_no == 1 and "corpus_manifest" in obj:
                manifest = _manifest_from_obj(obj, str(path), line_no)
                continue
            base = _bug_from_obj(obj, str(path), line_no)
            has_tests = "dev_tests" in obj if with_tests is None else with_tests
            if has_tests:
                samples.append(
                    SemanticSample(
                        base,
                        _tests_from_obj(obj, "dev_tests", str(path), line_no),
                        _tests_from_obj(obj, "rgt_tests", str(path), line_no),
                    )
                )
            else:
                samples.append(base)
    return manifest, samples


def write_corpus(directory: Path, corpus: Corpus) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_split(directory / SPLIT_FILES["syntactic"], corpus.manifest, corpus.syntactic, "syntactic")
    write_split(directory / SPLIT_FILES["semantic"], corpus.manifest, corpus.semantic, "semantic")
    write_split(directory / SPLIT_FILES["test"], corpus.manifest, corpus.test, "test")


def read_corpus(directory: Path) -> Corpus:
    directory = Path(directory)
    manifest, syntactic = read_split(directory / SPLIT_FILES["syntactic"], with_tests=False)
    manifest_sem, semantic = read_split(directory / SPLIT_FILES["semantic"], with_tests=True)
    manifest_test, test = read_split(directory / SPLIT_FILES["test"], with_tests=True)
    manifest = manifest or manifest_sem or manifest_test
    if manifest is None:
        manifest = CorpusManifest(seed=0, n_syntactic=0, n_semantic=0, n_test=0)
    return Corpus(manifest, syntactic, semantic, test)
