"""Global configuration file (INI sections) and run manifests.

Flags override file values, which override the defaults below. Unknown
sections or keys are errors: a typo must not silently change an experiment.
Every CLI run writes a run-manifest JSON capturing the effective config,
seeds, and input file hashes; the timestamp field is the only part excluded
from reproducibility comparisons.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import time
from pathlib import Path

from rrlab import __version__
from rrlab.corpus.types import SizeConfig
from rrlab.discriminator import RewardConfig
from rrlab.errors import ConfigFileError
from rrlab.model import ModelConfig
from rrlab.training import SemanticTrainConfig, SyntacticTrainConfig

DEFAULTS: dict[str, dict] = {
    "model": {
        "d_model": 64,
        "n_heads": 4,
        "n_layers_enc": 2,
        "n_layers_dec": 2,
        "d_ff": 128,
        "max_input": 192,
        "max_target": 48,
        "dropout_rate": 0.0,
        "seed": 0,
    },
    "tokenizer": {"vocab_size": 512},
    "reward": {"s0": -0.4, "s1": -0.2, "s2": 0.2, "s3": 0.4, "s4": 0.6},
    "syntactic": {
        "epochs": 15,
        "batch_size": 32,
        "learning_rate": 1e-4,
        "optimizer": "adam",
        "shuffle": "bucket",
        "seed": 0,
    },
    "semantic": {
        "epochs": 4,
        "learning_rate": 1e-4,
        "optimizer": "adam",
        "candidate_policy": "greedy",
        "beam_n": 5,
        "alternation_semantic": 1,
        "alternation_syntactic": 1,
        "syntactic_batch_size": 32,
        "step_budget": 10_000,
        "seed": 0,
    },
    "eval": {"beam": 10, "ks": "1,5,10", "step_budget": 10_000},
    "corpus": {
        "seed": 7,
        "syntactic": 2000,
        "semantic": 100,
        "test": 100,
        "dev_tests": 4,
        "rgt_tests": 16,
        "step_budget": 10_000,
        "min_params": 1,
        "max_params": 3,
        "min_stmts": 2,
        "max_stmts": 5,
        "max_depth": 2,
        "max_expr_depth": 2,
    },
}


class LabConfig:
    """Effective configuration: defaults, overlaid by a config file."""

    def __init__(self, values: dict[str, dict] | None = None):
        self.values = {s: dict(kv) for s, kv in DEFAULTS.items()}
        for section, kv in (values or {}).items():
            self.values[section].update(kv)

    @staticmethod
    def load(path: str | Path | None) -> "LabConfig":
        if path is None:
            return LabConfig()
        parser = configparser.ConfigParser()
        read = parser.read(str(path))
        if not read:
            raise ConfigFileError(f"config file not found: {path}")
        values: dict[str, dict] = {}
        for section in parser.sections():
            if section not in DEFAULTS:
                raise ConfigFileError(f"{path}: unknown section [{section}]")
            values[section] = {}
            for key, raw in parser.items(section):
                if key not in DEFAULTS[section]:
                    raise ConfigFileError(f"{path}: unknown key {key!r} in [{section}]")
                values[section][key] = _coerce(raw, DEFAULTS[section][key], section, key, path)
        return LabConfig(values)

    def override(self, section: str, key: str, value) -> None:
        if value is None:
            return
        if section not in self.values or key not in self.values[section]:
            raise ConfigFileError(f"unknown config entry [{section}] {key}")
        self.values[section][key] = value

    # --- typed views -----------------------------------------------------------

    def model_config(self, vocab_size: int) -> ModelConfig:
        cfg = ModelConfig(vocab_size=vocab_size, **self.values["model"])
        cfg.validate()
        return cfg

    def reward_config(self) -> RewardConfig:
        cfg = RewardConfig(**self.values["reward"])
        cfg.validate()
        return cfg

    def syntactic_config(self) -> SyntacticTrainConfig:
        cfg = SyntacticTrainConfig(**self.values["syntactic"])
        cfg.validate()
        return cfg

    def semantic_config(self) -> SemanticTrainConfig:
        kv = dict(self.values["semantic"])
        cfg = SemanticTrainConfig(reward=self.reward_config(), **kv)
        cfg.validate()
        return cfg

    def size_config(self) -> SizeConfig:
        kv = self.values["corpus"]
        return SizeConfig(
            min_params=kv["min_params"],
            max_params=kv["max_params"],
            min_stmts=kv["min_stmts"],
            max_stmts=kv["max_stmts"],
            max_depth=kv["max_depth"],
            max_expr_depth=kv["max_expr_depth"],
        )

    def eval_ks(self) -> list[int]:
        raw = self.values["eval"]["ks"]
        if isinstance(raw, str):
            return sorted(int(part) for part in raw.split(",") if part.strip())
        return sorted(int(v) for v in raw)

    def snapshot(self) -> dict:
        return {s: dict(kv) for s, kv in self.values.items()}


def _coerce(raw: str, default, section: str, key: str, path) -> object:
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigFileError(
            f"{path}: [{section}] {key} = {raw!r} is not a {type(default).__name__}"
        )


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_run_manifest(
    path: Path,
    command: str,
    config: LabConfig,
    inputs: dict[str, str | Path] | None = None,
    extra: dict | None = None,
) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "config": config.snapshot(),
        "inputs": {
            name: {"path": str(p), "sha256": file_sha256(p)}
            for name, p in (inputs or {}).items()
            if Path(p).exists()
        },
        "extra": extra or {},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),  # excluded from comparisons
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def manifests_equal_ignoring_timestamp(a: Path, b: Path) -> bool:
    obj_a = json.loads(Path(a).read_text(encoding="utf-8"))
    obj_b = json.loads(Path(b).read_text(encoding="utf-8"))
    obj_a.pop("timestamp", None)
    obj_b.pop("timestamp", None)
    return obj_a == obj_b
