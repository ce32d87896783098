"""Parameter initialization and bookkeeping.

Parameters are immutable snapshots: arrays are float32 and marked read-only;
updates build a new snapshot. Computation upcasts to float64 once per
snapshot (cached) so gradients meet tight finite-difference tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rrlab.errors import ShapeMismatchError
from rrlab.model.config import ModelConfig


def _attn_shapes(d: int) -> list[tuple[str, tuple[int, ...]]]:
    return [
        ("wq", (d, d)),
        ("bq", (d,)),
        ("wk", (d, d)),
        ("bk", (d,)),
        ("wv", (d, d)),
        ("bv", (d,)),
        ("wo", (d, d)),
        ("bo", (d,)),
    ]


def _ln_shapes(d: int) -> list[tuple[str, tuple[int, ...]]]:
    return [("g", (d,)), ("b", (d,))]


def _ff_shapes(d: int, d_ff: int) -> list[tuple[str, tuple[int, ...]]]:
    return [("w1", (d, d_ff)), ("b1", (d_ff,)), ("w2", (d_ff, d)), ("b2", (d,))]


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Named array shapes, in a fixed deterministic order."""
    d, v = config.d_model, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {"tok_emb": (v, d)}
    for i in range(config.n_layers_enc):
        for part, suffixes in (
            (f"enc{i}_ln1", _ln_shapes(d)),
            (f"enc{i}_attn", _attn_shapes(d)),
            (f"enc{i}_ln2", _ln_shapes(d)),
            (f"enc{i}_ff", _ff_shapes(d, config.d_ff)),
        ):
            for suffix, shape in suffixes:
                shapes[f"{part}_{suffix}"] = shape
    for suffix, shape in _ln_shapes(d):
        shapes[f"enc_lnf_{suffix}"] = shape
    for i in range(config.n_layers_dec):
        for part, suffixes in (
            (f"dec{i}_ln1", _ln_shapes(d)),
            (f"dec{i}_self", _attn_shapes(d)),
            (f"dec{i}_ln2", _ln_shapes(d)),
            (f"dec{i}_cross", _attn_shapes(d)),
            (f"dec{i}_ln3", _ln_shapes(d)),
            (f"dec{i}_ff", _ff_shapes(d, config.d_ff)),
        ):
            for suffix, shape in suffixes:
                shapes[f"{part}_{suffix}"] = shape
    for suffix, shape in _ln_shapes(d):
        shapes[f"dec_lnf_{suffix}"] = shape
    shapes["out_w"] = (d, v)
    shapes["out_b"] = (v,)
    return shapes


def param_count(config: ModelConfig) -> int:
    return sum(int(np.prod(shape)) for shape in param_shapes(config).values())


@dataclass
class Parameters:
    """All learnable weights of the patch generator."""

    config: ModelConfig
    arrays: dict[str, np.ndarray]
    _f64: dict[str, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        for arr in self.arrays.values():
            arr.flags.writeable = False

    def as_f64(self) -> dict[str, np.ndarray]:
        """Float64 view of the weights, memoized per snapshot."""
        if self._f64 is None:
            f64 = {k: a.astype(np.float64) for k, a in self.arrays.items()}
            for arr in f64.values():
                arr.flags.writeable = False
            self._f64 = f64
        return self._f64

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def check_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays.values())

    def equal(self, other: "Parameters") -> bool:
        return self.config == other.config and all(
            np.array_equal(self.arrays[k], other.arrays[k]) for k in self.arrays
        )


def init(config: ModelConfig) -> Parameters:
    """Fixed-scale initialization, deterministic in config.seed:
    Xavier-uniform matrices, N(0, 0.02) embeddings, zero biases, unit LN gains."""
    config.validate()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    arrays: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        if name == "tok_emb":
            a = rng.normal(0.0, 0.02, size=shape)
        elif name.endswith("_g"):
            a = np.ones(shape)
        elif len(shape) == 1:
            a = np.zeros(shape)
        else:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            a = rng.uniform(-limit, limit, size=shape)
        arrays[name] = a.astype(np.float32)
    return Parameters(config, arrays)


def check_grad_shapes(params: Parameters, grads: dict[str, np.ndarray]) -> None:
    if set(grads) != set(params.arrays):
        raise ShapeMismatchError("gradient names do not match parameter names")
    for name, grad in grads.items():
        if grad.shape != params.arrays[name].shape:
            raise ShapeMismatchError(
                f"{name}: gradient shape {grad.shape} != parameter shape "
                f"{params.arrays[name].shape}"
            )
