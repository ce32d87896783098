"""Parameter updates: plain gradient descent (the reference mode) and an
adaptive-moment mode for the end-to-end experiments.

Non-finite gradients refuse the update: the returned snapshot is the input
snapshot and the event is reported to the caller via NonFiniteGradientError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rrlab.errors import NonFiniteGradientError
from rrlab.model.params import Parameters, check_grad_shapes


def _grads_finite(grads: dict[str, np.ndarray]) -> bool:
    return all(np.isfinite(g).all() for g in grads.values())


def apply_update(params: Parameters, grads: dict[str, np.ndarray], lr: float) -> Parameters:
    """Plain descent: theta' = theta - lr * grad, computed in float64."""
    check_grad_shapes(params, grads)
    if not _grads_finite(grads):
        raise NonFiniteGradientError("refusing update: gradient contains NaN/Inf")
    p64 = params.as_f64()
    new = {
        name: (p64[name] - lr * grads[name]).astype(np.float32)
        for name in params.arrays
    }
    return Parameters(params.config, new)


@dataclass
class AdamState:
    """First/second moment estimates, kept in float64."""

    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(params: Parameters) -> "AdamState":
        return AdamState(
            m={k: np.zeros(a.shape) for k, a in params.arrays.items()},
            v={k: np.zeros(a.shape) for k, a in params.arrays.items()},
        )


def apply_update_adam(
    params: Parameters, grads: dict[str, np.ndarray], lr: float, state: AdamState
) -> Parameters:
    """Adam step; mutates `state` in place and returns the new snapshot."""
    check_grad_shapes(params, grads)
    if not _grads_finite(grads):
        raise NonFiniteGradientError("refusing update: gradient contains NaN/Inf")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.step
    bias2 = 1.0 - b2**state.step
    p64 = params.as_f64()
    new = {}
    for name in params.arrays:
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * (g * g)
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        new[name] = (p64[name] - lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(np.float32)
    return Parameters(params.config, new)
