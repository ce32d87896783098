"""Encoder-decoder transformer: forward, loss, and hand-written backward.

All computation runs in float64 (weights are upcast once per snapshot);
losses and softmaxes therefore meet the 1e-12-level tolerances the training
invariants demand. backward() returns d(loss_scale * L)/dtheta and is exactly
linear in loss_scale: gradients are computed once and scaled at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rrlab.errors import ShapeMismatchError, StaleCacheError
from rrlab.model.config import ModelConfig
from rrlab.model.params import Parameters, check_grad_shapes
from rrlab.tokenizer import BOS, PAD

_NEG = -1e30
_LN_EPS = 1e-5

_pos_tables: dict[tuple[int, int], np.ndarray] = {}


def _pos_table(length: int, d: int) -> np.ndarray:
    """Sinusoidal positional encodings, cached per (length, d)."""
    key = (length, d)
    table = _pos_tables.get(key)
    if table is None:
        pos = np.arange(length, dtype=np.float64)[:, None]
        dim = np.arange(d, dtype=np.float64)[None, :]
        angle = pos / np.power(10000.0, (2.0 * (dim // 2)) / d)
        table = np.where(dim % 2 == 0, np.sin(angle), np.cos(angle))
        table.flags.writeable = False
        _pos_tables[key] = table
    return table


# --- primitives ---------------------------------------------------------------


def _linear_bwd(dout, x, w, grads, wname, bname):
    x2 = x.reshape(-1, x.shape[-1])
    do2 = dout.reshape(-1, dout.shape[-1])
    grads[wname] += x2.T @ do2
    grads[bname] += do2.sum(axis=0)
    return dout @ w.T


def _ln_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv_std
    return xhat * g + b, (xhat, inv_std)


def _ln_bwd(dout, cache, g, grads, prefix):
    xhat, inv_std = cache
    d = xhat.shape[-1]
    grads[prefix + "_g"] += (dout * xhat).reshape(-1, d).sum(axis=0)
    grads[prefix + "_b"] += dout.reshape(-1, d).sum(axis=0)
    dxhat = dout * g
    return inv_std * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )


def _softmax(x):
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x, n_heads):
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


def _attn_fwd(p, prefix, xq, xkv, mask, n_heads, need_cache):
    q = _split_heads(xq @ p[prefix + "_wq"] + p[prefix + "_bq"], n_heads)
    k = _split_heads(xkv @ p[prefix + "_wk"] + p[prefix + "_bk"], n_heads)
    v = _split_heads(xkv @ p[prefix + "_wv"] + p[prefix + "_bv"], n_heads)
    scale = 1.0 / np.sqrt(q.shape[-1])
    scores = (q @ k.swapaxes(-1, -2)) * scale
    if mask is not None:
        scores = scores + mask
    alpha = _softmax(scores)
    ctx = _merge_heads(alpha @ v)
    out = ctx @ p[prefix + "_wo"] + p[prefix + "_bo"]
    cache = (xq, xkv, q, k, v, alpha, ctx, scale) if need_cache else None
    return out, cache


def _attn_bwd(dout, cache, p, prefix, n_heads, grads):
    xq, xkv, q, k, v, alpha, ctx, scale = cache
    dctx = _linear_bwd(dout, ctx, p[prefix + "_wo"], grads, prefix + "_wo", prefix + "_bo")
    dctx = _split_heads(dctx, n_heads)
    dalpha = dctx @ v.swapaxes(-1, -2)
    dv = alpha.swapaxes(-1, -2) @ dctx
    dscores = alpha * (dalpha - (dalpha * alpha).sum(axis=-1, keepdims=True))
    dq = (dscores @ k) * scale
    dk = (dscores.swapaxes(-1, -2) @ q) * scale
    dxq = _linear_bwd(_merge_heads(dq), xq, p[prefix + "_wq"], grads, prefix + "_wq", prefix + "_bq")
    dxkv = _linear_bwd(_merge_heads(dk), xkv, p[prefix + "_wk"], grads, prefix + "_wk", prefix + "_bk")
    dxkv += _linear_bwd(_merge_heads(dv), xkv, p[prefix + "_wv"], grads, prefix + "_wv", prefix + "_bv")
    return dxq, dxkv


def _ff_fwd(p, prefix, x, need_cache):
    pre = x @ p[prefix + "_w1"] + p[prefix + "_b1"]
    hidden = np.maximum(pre, 0.0)
    out = hidden @ p[prefix + "_w2"] + p[prefix + "_b2"]
    cache = (x, pre > 0.0, hidden) if need_cache else None
    return out, cache


def _ff_bwd(dout, cache, p, prefix, grads):
    x, relu_mask, hidden = cache
    dhidden = _linear_bwd(dout, hidden, p[prefix + "_w2"], grads, prefix + "_w2", prefix + "_b2")
    dhidden = dhidden * relu_mask
    return _linear_bwd(dhidden, x, p[prefix + "_w1"], grads, prefix + "_w1", prefix + "_b1")


def _dropout(x, rate, rng):
    if rate <= 0.0 or rng is None:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def _apply_mask(dx, mask):
    return dx if mask is None else dx * mask


# --- masks and embeddings -----------------------------------------------------


def _pad_mask(ids):
    return np.where(ids[:, None, None, :] == PAD, _NEG, 0.0)


def _causal_mask(t):
    return np.triu(np.full((1, 1, t, t), _NEG), k=1)


def _embed(p, ids, d):
    return p["tok_emb"][ids] + _pos_table(ids.shape[1], d)


# --- stacks -------------------------------------------------------------------


def _encoder_fwd(p, cfg: ModelConfig, input_ids, train, rng, need_cache):
    x = _embed(p, input_ids, cfg.d_model)
    enc_mask = _pad_mask(input_ids)
    layers = []
    rate = cfg.dropout_rate if train else 0.0
    for i in range(cfg.n_layers_enc):
        h1, ln1 = _ln_fwd(x, p[f"enc{i}_ln1_g"], p[f"enc{i}_ln1_b"])
        a, attn = _attn_fwd(p, f"enc{i}_attn", h1, h1, enc_mask, cfg.n_heads, need_cache)
        a, drop1 = _dropout(a, rate, rng)
        x = x + a
        h2, ln2 = _ln_fwd(x, p[f"enc{i}_ln2_g"], p[f"enc{i}_ln2_b"])
        f, ff = _ff_fwd(p, f"enc{i}_ff", h2, need_cache)
        f, drop2 = _dropout(f, rate, rng)
        x = x + f
        layers.append((ln1, attn, drop1, ln2, ff, drop2))
    out, lnf = _ln_fwd(x, p["enc_lnf_g"], p["enc_lnf_b"])
    return out, enc_mask, (layers, lnf) if need_cache else None


def _encoder_bwd(dout, cache, p, cfg: ModelConfig, input_ids, grads):
    layers, lnf = cache
    dx = _ln_bwd(dout, lnf, p["enc_lnf_g"], grads, "enc_lnf")
    for i in reversed(range(cfg.n_layers_enc)):
        ln1, attn, drop1, ln2, ff, drop2 = layers[i]
        df = _apply_mask(dx, drop2)
        dh2 = _ff_bwd(df, ff, p, f"enc{i}_ff", grads)
        dx = dx + _ln_bwd(dh2, ln2, p[f"enc{i}_ln2_g"], grads, f"enc{i}_ln2")
        da = _apply_mask(dx, drop1)
        dq, dkv = _attn_bwd(da, attn, p, f"enc{i}_attn", cfg.n_heads, grads)
        dx = dx + _ln_bwd(dq + dkv, ln1, p[f"enc{i}_ln1_g"], grads, f"enc{i}_ln1")
    _embed_bwd(dx, input_ids, grads)


def _embed_bwd(dx, ids, grads):
    np.add.at(grads["tok_emb"], ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))


def _decoder_fwd(p, cfg: ModelConfig, dec_in_ids, enc_out, enc_mask, train, rng, need_cache):
    y = _embed(p, dec_in_ids, cfg.d_model)
    causal = _causal_mask(dec_in_ids.shape[1])
    layers = []
    rate = cfg.dropout_rate if train else 0.0
    for i in range(cfg.n_layers_dec):
        h1, ln1 = _ln_fwd(y, p[f"dec{i}_ln1_g"], p[f"dec{i}_ln1_b"])
        a, self_attn = _attn_fwd(p, f"dec{i}_self", h1, h1, causal, cfg.n_heads, need_cache)
        a, drop1 = _dropout(a, rate, rng)
        y = y + a
        h2, ln2 = _ln_fwd(y, p[f"dec{i}_ln2_g"], p[f"dec{i}_ln2_b"])
        c, cross = _attn_fwd(p, f"dec{i}_cross", h2, enc_out, enc_mask, cfg.n_heads, need_cache)
        c, drop2 = _dropout(c, rate, rng)
        y = y + c
        h3, ln3 = _ln_fwd(y, p[f"dec{i}_ln3_g"], p[f"dec{i}_ln3_b"])
        f, ff = _ff_fwd(p, f"dec{i}_ff", h3, need_cache)
        f, drop3 = _dropout(f, rate, rng)
        y = y + f
        layers.append((ln1, self_attn, drop1, ln2, cross, drop2, ln3, ff, drop3))
    out, lnf = _ln_fwd(y, p["dec_lnf_g"], p["dec_lnf_b"])
    return out, (layers, lnf) if need_cache else None


def _decoder_bwd(dout, cache, p, cfg: ModelConfig, dec_in_ids, grads):
    """Returns d(enc_out) accumulated over the cross-attention layers."""
    layers, lnf = cache
    dy = _ln_bwd(dout, lnf, p["dec_lnf_g"], grads, "dec_lnf")
    denc = None
    for i in reversed(range(cfg.n_layers_dec)):
        ln1, self_attn, drop1, ln2, cross, drop2, ln3, ff, drop3 = layers[i]
        df = _apply_mask(dy, drop3)
        dh3 = _ff_bwd(df, ff, p, f"dec{i}_ff", grads)
        dy = dy + _ln_bwd(dh3, ln3, p[f"dec{i}_ln3_g"], grads, f"dec{i}_ln3")
        dc = _apply_mask(dy, drop2)
        dh2, dkv = _attn_bwd(dc, cross, p, f"dec{i}_cross", cfg.n_heads, grads)
        denc = dkv if denc is None else denc + dkv
        dy = dy + _ln_bwd(dh2, ln2, p[f"dec{i}_ln2_g"], grads, f"dec{i}_ln2")
        da = _apply_mask(dy, drop1)
        dq, dself_kv = _attn_bwd(da, self_attn, p, f"dec{i}_self", cfg.n_heads, grads)
        dy = dy + _ln_bwd(dq + dself_kv, ln1, p[f"dec{i}_ln1_g"], grads, f"dec{i}_ln1")
    _embed_bwd(dy, dec_in_ids, grads)
    return denc


# --- teacher-forced forward/backward -------------------------------------------


@dataclass
class ForwardResult:
    """distributions: per-position next-token distributions over the vocab;
    loss: mean negative log-likelihood over non-PAD target positions."""

    distributions: np.ndarray
    loss: float
    cache: dict


def _as_batch(ids, name: str) -> np.ndarray:
    arr = np.asarray(ids, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeMismatchError(f"{name} must be a 1-D or 2-D id array")
    if arr.shape[1] == 0:
        raise ShapeMismatchError(f"{name} must not be empty")
    return arr


def _validate_ids(arr, limit, max_len, name):
    if arr.shape[1] > max_len:
        raise ShapeMismatchError(f"{name} length {arr.shape[1]} exceeds model maximum {max_len}")
    if arr.min() < 0 or arr.max() >= limit:
        raise ShapeMismatchError(f"{name} contains ids outside the vocabulary (size {limit})")


def shift_right(target_ids: np.ndarray) -> np.ndarray:
    """Teacher-forcing decoder input: BOS followed by the target minus its tail."""
    dec_in = np.empty_like(target_ids)
    dec_in[:, 0] = BOS
    dec_in[:, 1:] = target_ids[:, :-1]
    return dec_in


def forward_teacher_forced(
    params: Parameters,
    input_ids,
    target_ids,
    train: bool = False,
    dropout_rng: np.random.Generator | None = None,
) -> ForwardResult:
    """Teacher-forced pass; caches activations for backward().

    Accepts one example (1-D ids) or a PAD-padded batch (2-D)."""
    cfg = params.config
    squeeze = np.asarray(input_ids).ndim == 1
    inp = _as_batch(input_ids, "input_ids")
    tgt = _as_batch(target_ids, "target_ids")
    if inp.shape[0] != tgt.shape[0]:
        raise ShapeMismatchError("input and target batch sizes differ")
    _validate_ids(inp, cfg.vocab_size, cfg.max_input, "input_ids")
    _validate_ids(tgt, cfg.vocab_size, cfg.max_target, "target_ids")
    p = params.as_f64()
    rng = dropout_rng if train and cfg.dropout_rate > 0.0 else None
    dec_in = shift_right(tgt)
    enc_out, enc_mask, enc_cache = _encoder_fwd(p, cfg, inp, train, rng, True)
    dec_out, dec_cache = _decoder_fwd(p, cfg, dec_in, enc_out, enc_mask, train, rng, True)
    logits = dec_out @ p["out_w"] + p["out_b"]
    zmax = logits.max(axis=-1, keepdims=True)
    logz = zmax + np.log(np.exp(logits - zmax).sum(axis=-1, keepdims=True))
    logp = logits - logz
    probs = np.exp(logp)
    mask = (tgt != PAD).astype(np.float64)
    n_tokens = mask.sum()
    picked = np.take_along_axis(logp, tgt[:, :, None], axis=-1)[:, :, 0]
    loss = float(-(picked * mask).sum() / n_tokens)
    cache = {
        "params": params,
        "inp": inp,
        "tgt": tgt,
        "dec_in": dec_in,
        "dec_out": dec_out,
        "enc_cache": enc_cache,
        "dec_cache": dec_cache,
        "probs": probs,
        "mask": mask,
        "n_tokens": n_tokens,
    }
    return ForwardResult(probs[0] if squeeze else probs, loss, cache)


def backward(params: Parameters, cache: dict, loss_scale: float = 1.0) -> dict[str, np.ndarray]:
    """d(loss_scale * L)/dtheta for every parameter.

    Exactly linear in loss_scale: unscaled gradients are computed once and
    multiplied by the scale, so backward(k*s) == k * backward(s) elementwise."""
    if cache.get("params") is not params:
        raise StaleCacheError("activation cache was built for different parameters")
    cfg = params.config
    p = params.as_f64()
    grads = {name: np.zeros(arr.shape, dtype=np.float64) for name, arr in params.arrays.items()}
    probs, tgt, mask, n_tokens = cache["probs"], cache["tgt"], cache["mask"], cache["n_tokens"]
    dlogits = probs.copy()
    np.put_along_axis(
        dlogits, tgt[:, :, None], np.take_along_axis(dlogits, tgt[:, :, None], -1) - 1.0, -1
    )
    dlogits *= mask[:, :, None] / n_tokens
    ddec_out = _linear_bwd(dlogits, cache["dec_out"], p["out_w"], grads, "out_w", "out_b")
    denc = _decoder_bwd(ddec_out, cache["dec_cache"], p, cfg, cache["dec_in"], grads)
    _encoder_bwd(denc, cache["enc_cache"], p, cfg, cache["inp"], grads)
    if loss_scale != 1.0:
        for name in grads:
            grads[name] *= loss_scale
    check_grad_shapes(params, grads)
    return grads


# --- decoding support ----------------------------------------------------------


def encode_input(params: Parameters, input_ids):
    """Run the encoder once for decoding; returns (enc_out, enc_mask)."""
    cfg = params.config
    inp = _as_batch(input_ids, "input_ids")
    _validate_ids(inp, cfg.vocab_size, cfg.max_input, "input_ids")
    enc_out, enc_mask, _ = _encoder_fwd(params.as_f64(), cfg, inp, False, None, False)
    return enc_out, enc_mask


def next_token_logprobs(params: Parameters, enc_out, enc_mask, prefix_ids) -> np.ndarray:
    """Log-probabilities of the next token after each prefix (no caching).

    prefix_ids: (B, t) emitted ids, possibly t == 0; enc_out broadcasts when
    it holds a single input shared by all prefixes."""
    cfg = params.config
    p = params.as_f64()
    b = prefix_ids.shape[0]
    dec_in = np.concatenate(
        [np.full((b, 1), BOS, dtype=np.int64), prefix_ids.astype(np.int64)], axis=1
    )
    if enc_out.shape[0] != b:
        enc_out = np.broadcast_to(enc_out, (b,) + enc_out.shape[1:])
        enc_mask = np.broadcast_to(enc_mask, (b,) + enc_mask.shape[1:])
    dec_out, _ = _decoder_fwd(p, cfg, dec_in, enc_out, enc_mask, False, None, False)
    logits = dec_out[:, -1, :] @ p["out_w"] + p["out_b"]
    zmax = logits.max(axis=-1, keepdims=True)
    return logits - (zmax + np.log(np.exp(logits - zmax).sum(axis=-1, keepdims=True)))
