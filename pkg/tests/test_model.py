"""Model structure: init, parameter accounting, forward contracts."""

import numpy as np
import pytest

from rrlab.errors import InvalidConfigError, ShapeMismatchError, StaleCacheError
from rrlab.model import (
    ModelConfig,
    Parameters,
    backward,
    forward_teacher_forced,
    init,
    param_count,
    param_shapes,
)
from rrlab.tokenizer import EOS, PAD


def test_init_deterministic(tiny_model_config):
    a = init(tiny_model_config)
    b = init(tiny_model_config)
    assert a.equal(b)


def test_init_invalid_config():
    with pytest.raises(InvalidConfigError):
        ModelConfig(vocab_size=100, d_model=65, n_heads=4).validate()
    with pytest.raises(InvalidConfigError):
        ModelConfig(vocab_size=100, d_model=0).validate()
    with pytest.raises(InvalidConfigError):
        ModelConfig(vocab_size=4).validate()


def closed_form_param_count(v, d, d_ff, n_enc, n_dec):
    """Independent derivation of the parameter count (documented in docs/model.md):
    embedding V*d; per attention block 4*(d*d + d); per feed-forward
    2*d*d_ff + d_ff + d; per layernorm 2*d; encoder layer = attn + ff + 2 LN;
    decoder layer = 2*attn + ff + 3 LN; plus two final LNs and the d*V + V
    output projection."""
    attn = 4 * (d * d + d)
    ff = 2 * d * d_ff + d_ff + d
    ln = 2 * d
    enc_layer = attn + ff + 2 * ln
    dec_layer = 2 * attn + ff + 3 * ln
    return v * d + n_enc * enc_layer + ln + n_dec * dec_layer + ln + d * v + v


def test_param_count_matches_closed_form():
    cfg = ModelConfig(vocab_size=512, d_model=64, n_heads=4, n_layers_enc=2, n_layers_dec=2, d_ff=128)
    assert param_count(cfg) == closed_form_param_count(512, 64, 128, 2, 2)
    small = ModelConfig(vocab_size=20, d_model=8, n_heads=2, n_layers_enc=1, n_layers_dec=1, d_ff=16)
    assert param_count(small) == closed_form_param_count(20, 8, 16, 1, 1)


def test_init_shapes_match_config(tiny_model_config, tiny_params):
    shapes = param_shapes(tiny_model_config)
    assert set(tiny_params.arrays) == set(shapes)
    for name, arr in tiny_params.arrays.items():
        assert arr.shape == shapes[name]
        assert arr.dtype == np.float32
    assert tiny_params.n_params() == param_count(tiny_model_config)


def test_params_are_read_only(tiny_params):
    with pytest.raises(ValueError):
        tiny_params.arrays["tok_emb"][0, 0] = 1.0


def test_forward_uniform_when_output_projection_zeroed(tiny_model_config, tiny_params):
    arrays = {k: v.copy() for k, v in tiny_params.arrays.items()}
    arrays["out_w"] = np.zeros_like(arrays["out_w"])
    arrays["out_b"] = np.zeros_like(arrays["out_b"])
    params = Parameters(tiny_model_config, arrays)
    inp = [5, 6, 7]
    tgt = [8, 9, EOS]
    res = forward_teacher_forced(params, inp, tgt)
    v = tiny_model_config.vocab_size
    assert np.allclose(res.distributions, 1.0 / v, atol=1e-9)
    assert abs(res.loss - np.log(v)) < 1e-6


def test_forward_distributions_normalized(tiny_params):
    rng = np.random.default_rng(0)
    inp = rng.integers(5, 20, size=8)
    tgt = rng.integers(5, 20, size=5)
    res = forward_teacher_forced(tiny_params, inp, tgt)
    assert np.abs(res.distributions.sum(axis=-1) - 1.0).max() < 1e-6
    assert res.loss >= 0.0


def test_forward_pad_positions_excluded(tiny_params):
    inp = [5, 6, 7, 8]
    tgt = [9, 10, EOS]
    base = forward_teacher_forced(tiny_params, inp, tgt).loss
    padded = forward_teacher_forced(tiny_params, inp, list(tgt) + [PAD, PAD]).loss
    assert padded == pytest.approx(base, abs=1e-12)


def test_forward_shape_errors(tiny_params):
    with pytest.raises(ShapeMismatchError):
        forward_teacher_forced(tiny_params, [5, 6], [50])  # id out of vocab
    with pytest.raises(ShapeMismatchError):
        forward_teacher_forced(tiny_params, list(range(5, 5 + 17)) * 2, [5])  # too long
    with pytest.raises(ShapeMismatchError):
        forward_teacher_forced(tiny_params, [], [5])


def test_backward_stale_cache(tiny_model_config, tiny_params):
    res = forward_teacher_forced(tiny_params, [5, 6, 7], [8, EOS])
    other = init(tiny_model_config)
    with pytest.raises(StaleCacheError):
        backward(other, res.cache)


def test_forward_deterministic(tiny_params):
    inp, tgt = [5, 6, 7], [8, 9, EOS]
    a = forward_teacher_forced(tiny_params, inp, tgt).loss
    b = forward_teacher_forced(tiny_params, inp, tgt).loss
    assert a == b


def test_batched_forward_matches_single(tiny_params):
    inp1, tgt1 = [5, 6, 7], [8, EOS]
    inp2, tgt2 = [9, 10], [11, 12, EOS]
    t_in = max(len(inp1), len(inp2))
    t_tg = max(len(tgt1), len(tgt2))
    binp = np.full((2, t_in), PAD, dtype=np.int64)
    btgt = np.full((2, t_tg), PAD, dtype=np.int64)
    binp[0, : len(inp1)], binp[1, : len(inp2)] = inp1, inp2
    btgt[0, : len(tgt1)], btgt[1, : len(tgt2)] = tgt1, tgt2
    batch_res = forward_teacher_forced(tiny_params, binp, btgt)
    l1 = forward_teacher_forced(tiny_params, inp1, tgt1).loss
    l2 = forward_teacher_forced(tiny_params, inp2, tgt2).loss
    # batch loss is the token mean over all non-PAD positions of both examples
    expected = (l1 * len(tgt1) + l2 * len(tgt2)) / (len(tgt1) + len(tgt2))
    assert batch_res.loss == pytest.approx(expected, rel=1e-12)
