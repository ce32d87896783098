"""Bug corpus: random programs, mutation-injected single-hunk bugs,
derived developer/reference tests, and line-oriented persistence."""

from rrlab.corpus.build import build_corpus, sanity_probe
from rrlab.corpus.generator import generate_programs
from rrlab.corpus.io import read_corpus, read_split, write_corpus, write_split
from rrlab.corpus.mutate import find_behavior_difference, line_hunk, make_context, mutate, probe_points
from rrlab.corpus.testgen import make_dev_tests, make_rgt_tests
from rrlab.corpus.types import (
    BugSample,
    Corpus,
    CorpusManifest,
    MutationKind,
    SemanticSample,
    SizeConfig,
    TestCase,
)

__all__ = [
    "build_corpus",
    "sanity_probe",
    "generate_programs",
    "read_corpus",
    "read_split",
    "write_corpus",
    "write_split",
    "find_behavior_difference",
    "line_hunk",
    "make_context",
    "mutate",
    "probe_points",
    "make_dev_tests",
    "make_rgt_tests",
    "BugSample",
    "Corpus",
    "CorpusManifest",
    "MutationKind",
    "SemanticSample",
    "SizeConfig",
    "TestCase",
]
