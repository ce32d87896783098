"""Gradient correctness against central finite differences, loss-scale
linearity, and update-rule arithmetic."""

import numpy as np
import pytest

from rrlab.errors import NonFiniteGradientError
from rrlab.model import (
    AdamState,
    Parameters,
    apply_update,
    apply_update_adam,
    backward,
    forward_teacher_forced,
    init,
)
from rrlab.tokenizer import EOS

EPS = 1e-4
REL_TOL = 1e-3
DENOM_FLOOR = 1e-8


def finite_difference(params, name, j, inp, tgt, cfg):
    losses = []
    original = float(params.arrays[name].ravel()[j])
    for sign in (1.0, -1.0):
        arrays = {k: v.copy() for k, v in params.arrays.items()}
        arrays[name].ravel()[j] = original + sign * EPS
        losses.append(forward_teacher_forced(Parameters(cfg, arrays), inp, tgt).loss)
    return (losses[0] - losses[1]) / (2 * EPS)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), DENOM_FLOOR)


def test_gradients_match_finite_differences_sampled(tiny_model_config, tiny_params):
    """Sampled spot-check for fast feedback; the full-parameter sweep runs in
    the acceptance suite."""
    rng = np.random.default_rng(7)
    inp = rng.integers(5, 20, size=7)
    tgt = np.concatenate([rng.integers(5, 20, size=4), [EOS]])
    res = forward_teacher_forced(tiny_params, inp, tgt)
    grads = backward(tiny_params, res.cache, 1.0)
    worst = 0.0
    for name in tiny_params.arrays:
        flat = tiny_params.arrays[name].ravel()
        picks = rng.choice(flat.size, size=min(4, flat.size), replace=False)
        for j in picks:
            fd = finite_difference(tiny_params, name, int(j), inp, tgt, tiny_model_config)
            worst = max(worst, rel_err(fd, grads[name].ravel()[int(j)]))
    assert worst < REL_TOL


def test_loss_scale_linearity(tiny_params):
    rng = np.random.default_rng(1)
    inp = rng.integers(5, 20, size=6)
    tgt = np.concatenate([rng.integers(5, 20, size=3), [EOS]])
    res = forward_teacher_forced(tiny_params, inp, tgt)
    g1 = backward(tiny_params, res.cache, 1.0)
    g12 = backward(tiny_params, res.cache, 1.2)
    for name in g1:
        assert np.abs(g12[name] - 1.2 * g1[name]).max() < 1e-10


def test_loss_scale_zero_gives_zero_gradients(tiny_params):
    res = forward_teacher_forced(tiny_params, [5, 6, 7], [8, EOS])
    g0 = backward(tiny_params, res.cache, 0.0)
    assert all((g == 0.0).all() for g in g0.values())


def test_apply_update_plain_arithmetic(tiny_model_config):
    params = init(tiny_model_config)
    arrays = {k: np.ones_like(v) for k, v in params.arrays.items()}
    ones = Parameters(tiny_model_config, arrays)
    grads = {k: np.full(v.shape, 0.5) for k, v in ones.arrays.items()}
    updated = apply_update(ones, grads, lr=0.1)
    for arr in updated.arrays.values():
        assert np.allclose(arr, 0.95, atol=1e-7)


def test_apply_update_zero_gradient_keeps_params(tiny_params):
    grads = {k: np.zeros(v.shape) for k, v in tiny_params.arrays.items()}
    updated = apply_update(tiny_params, grads, lr=0.5)
    assert updated.equal(tiny_params)


def test_apply_update_refuses_nan(tiny_params):
    grads = {k: np.zeros(v.shape) for k, v in tiny_params.arrays.items()}
    grads["out_b"][0] = np.nan
    with pytest.raises(NonFiniteGradientError):
        apply_update(tiny_params, grads, lr=0.1)
    with pytest.raises(NonFiniteGradientError):
        apply_update_adam(tiny_params, grads, lr=0.1, state=AdamState.for_params(tiny_params))


def test_adam_moves_against_gradient(tiny_params):
    grads = {k: np.ones(v.shape) for k, v in tiny_params.arrays.items()}
    state = AdamState.for_params(tiny_params)
    updated = apply_update_adam(tiny_params, grads, lr=0.01, state=state)
    delta = updated.arrays["out_b"] - tiny_params.arrays["out_b"]
    assert (delta < 0).all()
    assert state.step == 1


def test_update_preserves_finiteness(tiny_params):
    rng = np.random.default_rng(2)
    res = forward_teacher_forced(tiny_params, rng.integers(5, 20, size=6), [7, EOS])
    grads = backward(tiny_params, res.cache, 1.4)
    updated = apply_update(tiny_params, grads, lr=0.1)
    assert updated.check_finite()


def test_dropout_training_path(tiny_model_config):
    from dataclasses import replace

    cfg = replace(tiny_model_config, dropout_rate=0.2)
    params = init(cfg)
    rng1 = np.random.default_rng(9)
    rng2 = np.random.default_rng(9)
    a = forward_teacher_forced(params, [5, 6, 7], [8, EOS], train=True, dropout_rng=rng1)
    b = forward_teacher_forced(params, [5, 6, 7], [8, EOS], train=True, dropout_rng=rng2)
    assert a.loss == b.loss  # same rng stream, same masks
    eval_loss = forward_teacher_forced(params, [5, 6, 7], [8, EOS]).loss
    assert a.loss != eval_loss  # dropout actually does something in train mode
    grads = backward(params, a.cache, 1.0)  # masks flow through backward
    assert all(np.isfinite(g).all() for g in grads.values())
