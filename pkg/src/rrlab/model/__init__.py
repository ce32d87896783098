"""The patch generator: a small encoder-decoder transformer in numpy with
hand-written reverse-mode gradients, greedy decoding, and beam search."""

from rrlab.model.config import ModelConfig
from rrlab.model.decode import DecodeResult, beam_decode, greedy_decode
from rrlab.model.net import (
    ForwardResult,
    backward,
    encode_input,
    forward_teacher_forced,
    next_token_logprobs,
    shift_right,
)
from rrlab.model.params import Parameters, init, param_count, param_shapes
from rrlab.model.update import AdamState, apply_update, apply_update_adam

__all__ = [
    "ModelConfig",
    "DecodeResult",
    "beam_decode",
    "greedy_decode",
    "ForwardResult",
    "backward",
    "encode_input",
    "forward_teacher_forced",
    "next_token_logprobs",
    "shift_right",
    "Parameters",
    "init",
    "param_count",
    "param_shapes",
    "AdamState",
    "apply_update",
    "apply_update_adam",
]
