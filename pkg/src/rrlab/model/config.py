"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from rrlab.errors import InvalidConfigError


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 4
    n_layers_enc: int = 2
    n_layers_dec: int = 2
    d_ff: int = 128
    max_input: int = 192
    max_target: int = 48
    dropout_rate: float = 0.0  # applied only when training
    seed: int = 0

    def validate(self) -> None:
        positive = (
            ("vocab_size", self.vocab_size),
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("n_layers_enc", self.n_layers_enc),
            ("n_layers_dec", self.n_layers_dec),
            ("d_ff", self.d_ff),
            ("max_input", self.max_input),
            ("max_target", self.max_target),
        )
        for name, value in positive:
            if value <= 0:
                raise InvalidConfigError(f"{name} must be positive, got {value}")
        if self.d_model % self.n_heads != 0:
            raise InvalidConfigError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if self.vocab_size < 6:
            raise InvalidConfigError("vocab_size must be at least 6 (5 specials + 1)")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidConfigError("dropout_rate must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(obj: dict) -> "ModelConfig":
        cfg = ModelConfig(**obj)
        cfg.validate()
        return cfg
