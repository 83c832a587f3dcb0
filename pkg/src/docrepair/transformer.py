"""Encoder-decoder Transformer on the autodiff tensor engine.

Two numerically equivalent execution paths:

* an autodiff forward (``forward`` / ``forward_batch``) used for training,
* a plain-numpy mirror (``np_forward`` and the incremental
  ``DecoderSession``) used for decoding and scoring, where no gradients
  are needed.

Post-layer-norm residual blocks, fixed sinusoidal positions, ReLU
feed-forward, and (by default) output projection tied to the target
embedding. Sequences are right-padded; with right padding, causal masking
alone is sufficient for decoder self-attention, and masked attention
weights underflow to exactly zero, so padding never perturbs real
positions.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import tensor as T
from .bpe import PAD_ID
from .optim import AdamState
from .tensor import Tensor

MASK_NEG = -1e9

_CHECKPOINT_MAGIC = b"DRCK"
_CHECKPOINT_VERSION = 1


@dataclass
class TransformerConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    num_layers: int = 2
    num_heads: int = 2
    model_dim: int = 64
    ff_dim: int = 128
    dropout: float = 0.1
    label_smoothing: float = 0.1
    max_positions: int = 256
    tie_embeddings: bool = True

    def __post_init__(self):
        if min(self.num_layers, self.num_heads, self.model_dim, self.ff_dim) < 1:
            raise ValueError("layer, head, and dimension counts must be positive")
        if min(self.src_vocab_size, self.tgt_vocab_size) < 1:
            raise ValueError("vocabulary sizes must be positive")
        if self.model_dim % self.num_heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} not divisible by num_heads {self.num_heads}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError(f"label_smoothing must be in [0, 1), got {self.label_smoothing}")
        if self.max_positions < 1:
            raise ValueError("max_positions must be positive")

    def to_dict(self) -> dict:
        return {
            "src_vocab_size": self.src_vocab_size,
            "tgt_vocab_size": self.tgt_vocab_size,
            "num_layers": self.num_layers,
            "num_heads": self.num_heads,
            "model_dim": self.model_dim,
            "ff_dim": self.ff_dim,
            "dropout": self.dropout,
            "label_smoothing": self.label_smoothing,
            "max_positions": self.max_positions,
            "tie_embeddings": self.tie_embeddings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformerConfig":
        return cls(**d)


# -- parameters ---------------------------------------------------------------


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _attention_params(out: dict, prefix: str, d: int, rng) -> None:
    for name in ("wq", "wk", "wv", "wo"):
        out[f"{prefix}.{name}"] = _glorot(rng, d, d)
    for name in ("bq", "bk", "bv", "bo"):
        out[f"{prefix}.{name}"] = np.zeros(d)


def _ln_params(out: dict, prefix: str, d: int) -> None:
    out[f"{prefix}.gain"] = np.ones(d)
    out[f"{prefix}.bias"] = np.zeros(d)


def parameter_schema(config: TransformerConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    d, ff = config.model_dim, config.ff_dim
    out: dict[str, np.ndarray] = {}
    out["src_embed"] = rng.normal(0.0, d**-0.5, size=(config.src_vocab_size, d))
    out["tgt_embed"] = rng.normal(0.0, d**-0.5, size=(config.tgt_vocab_size, d))
    for i in range(config.num_layers):
        _attention_params(out, f"enc{i}.attn", d, rng)
        _ln_params(out, f"enc{i}.ln1", d)
        out[f"enc{i}.ff.w1"] = _glorot(rng, d, ff)
        out[f"enc{i}.ff.b1"] = np.zeros(ff)
        out[f"enc{i}.ff.w2"] = _glorot(rng, ff, d)
        out[f"enc{i}.ff.b2"] = np.zeros(d)
        _ln_params(out, f"enc{i}.ln2", d)
    for i in range(config.num_layers):
        _attention_params(out, f"dec{i}.self", d, rng)
        _ln_params(out, f"dec{i}.ln1", d)
        _attention_params(out, f"dec{i}.cross", d, rng)
        _ln_params(out, f"dec{i}.ln2", d)
        out[f"dec{i}.ff.w1"] = _glorot(rng, d, ff)
        out[f"dec{i}.ff.b1"] = np.zeros(ff)
        out[f"dec{i}.ff.w2"] = _glorot(rng, ff, d)
        out[f"dec{i}.ff.b2"] = np.zeros(d)
        _ln_params(out, f"dec{i}.ln3", d)
    if not config.tie_embeddings:
        out["out_proj"] = rng.normal(0.0, d**-0.5, size=(config.tgt_vocab_size, d))
    return out


def init_params(config: TransformerConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    return {k: Tensor(v, requires_grad=True) for k, v in parameter_schema(config, rng).items()}


@lru_cache(maxsize=8)
def _sinusoidal_table(max_positions: int, d: int) -> np.ndarray:
    pos = np.arange(max_positions)[:, None].astype(np.float64)
    dim = np.arange(d)[None, :]
    angle = pos / np.power(10000.0, (2 * (dim // 2)) / d)
    table = np.where(dim % 2 == 0, np.sin(angle), np.cos(angle))
    table.setflags(write=False)
    return table


def positional_encoding(length: int, config: TransformerConfig) -> np.ndarray:
    if length > config.max_positions:
        raise ValueError(f"sequence length {length} exceeds max_positions {config.max_positions}")
    return _sinusoidal_table(config.max_positions, config.model_dim)[:length]


def _key_mask(pad_mask: np.ndarray) -> np.ndarray:
    """[B, Tk] boolean (True = real) -> additive [B, 1, 1, Tk]."""
    return np.where(pad_mask, 0.0, MASK_NEG)[:, None, None, :]


def _causal_mask(t: int) -> np.ndarray:
    return np.where(np.tril(np.ones((t, t), dtype=bool)), 0.0, MASK_NEG)[None, None, :, :]


# -- autodiff forward ---------------------------------------------------------


def _split_heads(x: Tensor, b: int, t: int, h: int, dk: int) -> Tensor:
    return T.transpose(T.reshape(x, (b, t, h, dk)), (0, 2, 1, 3))


def _attention(
    q_in: Tensor,
    kv_in: Tensor,
    params: dict[str, Tensor],
    prefix: str,
    mask: np.ndarray,
    config: TransformerConfig,
) -> Tensor:
    b, tq, d = q_in.shape
    tk = kv_in.shape[1]
    h = config.num_heads
    dk = d // h
    q = _split_heads(q_in @ params[f"{prefix}.wq"] + params[f"{prefix}.bq"], b, tq, h, dk)
    k = _split_heads(kv_in @ params[f"{prefix}.wk"] + params[f"{prefix}.bk"], b, tk, h, dk)
    v = _split_heads(kv_in @ params[f"{prefix}.wv"] + params[f"{prefix}.bv"], b, tk, h, dk)
    scores = q @ T.transpose(k, (0, 1, 3, 2)) * (dk**-0.5) + Tensor(mask)
    ctx = T.softmax(scores, axis=-1) @ v
    merged = T.reshape(T.transpose(ctx, (0, 2, 1, 3)), (b, tq, d))
    return merged @ params[f"{prefix}.wo"] + params[f"{prefix}.bo"]


def _residual(
    x: Tensor,
    sub: Tensor,
    params: dict[str, Tensor],
    ln: str,
    config: TransformerConfig,
    train_mode: bool,
    rng,
) -> Tensor:
    if train_mode and config.dropout > 0.0:
        sub = T.dropout(sub, config.dropout, rng)
    return T.layer_norm(x + sub, params[f"{ln}.gain"], params[f"{ln}.bias"])


def _embed(
    ids: np.ndarray,
    table: Tensor,
    config: TransformerConfig,
    train_mode: bool,
    rng,
) -> Tensor:
    t = ids.shape[-1]
    x = T.embedding(table, ids) * (config.model_dim**0.5) + Tensor(
        positional_encoding(t, config)
    )
    if train_mode and config.dropout > 0.0:
        x = T.dropout(x, config.dropout, rng)
    return x


def _check_ids(ids: np.ndarray, vocab_size: int, what: str) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ValueError(f"{what} id out of range for vocabulary of {vocab_size}")
    return ids


def forward_batch(
    src_ids: np.ndarray,
    tgt_in_ids: np.ndarray,
    params: dict[str, Tensor],
    config: TransformerConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    src_pad_mask: np.ndarray | None = None,
) -> Tensor:
    """Teacher-forced logits [B, Tt, tgt_vocab] for padded id batches."""
    src_ids = _check_ids(src_ids, config.src_vocab_size, "source")
    tgt_in_ids = _check_ids(tgt_in_ids, config.tgt_vocab_size, "target")
    if train_mode and config.dropout > 0.0 and rng is None:
        raise ValueError("train_mode with dropout requires an rng")
    if src_pad_mask is None:
        src_pad_mask = src_ids != PAD_ID
    src_mask = _key_mask(src_pad_mask)

    x = _embed(src_ids, params["src_embed"], config, train_mode, rng)
    for i in range(config.num_layers):
        attn = _attention(x, x, params, f"enc{i}.attn", src_mask, config)
        x = _residual(x, attn, params, f"enc{i}.ln1", config, train_mode, rng)
        ff = T.relu(x @ params[f"enc{i}.ff.w1"] + params[f"enc{i}.ff.b1"])
        ff = ff @ params[f"enc{i}.ff.w2"] + params[f"enc{i}.ff.b2"]
        x = _residual(x, ff, params, f"enc{i}.ln2", config, train_mode, rng)
    enc_out = x

    causal = _causal_mask(tgt_in_ids.shape[1])
    y = _embed(tgt_in_ids, params["tgt_embed"], config, train_mode, rng)
    for i in range(config.num_layers):
        attn = _attention(y, y, params, f"dec{i}.self", causal, config)
        y = _residual(y, attn, params, f"dec{i}.ln1", config, train_mode, rng)
        cross = _attention(y, enc_out, params, f"dec{i}.cross", src_mask, config)
        y = _residual(y, cross, params, f"dec{i}.ln2", config, train_mode, rng)
        ff = T.relu(y @ params[f"dec{i}.ff.w1"] + params[f"dec{i}.ff.b1"])
        ff = ff @ params[f"dec{i}.ff.w2"] + params[f"dec{i}.ff.b2"]
        y = _residual(y, ff, params, f"dec{i}.ln3", config, train_mode, rng)

    table = params["tgt_embed"] if config.tie_embeddings else params["out_proj"]
    return y @ T.transpose(table, (1, 0))


def forward(
    src_ids,
    tgt_in_ids,
    params: dict[str, Tensor],
    config: TransformerConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    src_pad_mask: np.ndarray | None = None,
) -> Tensor:
    """Single-pair wrapper over forward_batch; returns [Tt, tgt_vocab]."""
    src = np.asarray(src_ids, dtype=np.int64)[None, :]
    tgt = np.asarray(tgt_in_ids, dtype=np.int64)[None, :]
    mask = None if src_pad_mask is None else np.asarray(src_pad_mask, bool)[None, :]
    out = forward_batch(src, tgt, params, config, train_mode, rng, mask)
    return T.reshape(out, out.shape[1:])


# -- plain-numpy mirror (no gradients) ----------------------------------------


def _np_values(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {k: p.values for k, p in params.items()}


def _np_attention(q_in, kv_in, p, prefix, mask, h):
    b, tq, d = q_in.shape
    tk = kv_in.shape[1]
    dk = d // h

    def heads(x, t):
        return (x).reshape(b, t, h, dk).transpose(0, 2, 1, 3)

    q = heads(q_in @ p[f"{prefix}.wq"] + p[f"{prefix}.bq"], tq)
    k = heads(kv_in @ p[f"{prefix}.wk"] + p[f"{prefix}.bk"], tk)
    v = heads(kv_in @ p[f"{prefix}.wv"] + p[f"{prefix}.bv"], tk)
    scores = q @ k.transpose(0, 1, 3, 2) * (dk**-0.5) + mask
    attn = _np_softmax(scores)
    ctx = (attn @ v).transpose(0, 2, 1, 3).reshape(b, tq, d)
    return ctx @ p[f"{prefix}.wo"] + p[f"{prefix}.bo"]


def _np_softmax(x, axis=-1):
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _np_log_softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def _np_layer_norm(x, p, prefix, eps=1e-6):
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / np.sqrt(var + eps) * p[f"{prefix}.gain"] + p[f"{prefix}.bias"]


def _np_ffn(x, p, prefix):
    hidden = np.maximum(x @ p[f"{prefix}.w1"] + p[f"{prefix}.b1"], 0.0)
    return hidden @ p[f"{prefix}.w2"] + p[f"{prefix}.b2"]


def _np_embed(ids, table, config):
    t = ids.shape[-1]
    return table[ids] * (config.model_dim**0.5) + positional_encoding(t, config)


def np_encode(
    src_ids: np.ndarray,
    params: dict[str, Tensor],
    config: TransformerConfig,
    src_pad_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Encoder output [B, Ts, d] plus the boolean pad mask used."""
    src_ids = _check_ids(src_ids, config.src_vocab_size, "source")
    p = _np_values(params)
    if src_pad_mask is None:
        src_pad_mask = src_ids != PAD_ID
    mask = _key_mask(src_pad_mask)
    x = _np_embed(src_ids, p["src_embed"], config)
    for i in range(config.num_layers):
        x = _np_layer_norm(x + _np_attention(x, x, p, f"enc{i}.attn", mask, config.num_heads), p, f"enc{i}.ln1")
        x = _np_layer_norm(x + _np_ffn(x, p, f"enc{i}.ff"), p, f"enc{i}.ln2")
    return x, src_pad_mask


def np_forward(
    src_ids: np.ndarray,
    tgt_in_ids: np.ndarray,
    params: dict[str, Tensor],
    config: TransformerConfig,
    src_pad_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient-free mirror of forward_batch; returns [B, Tt, tgt_vocab]."""
    tgt_in_ids = _check_ids(tgt_in_ids, config.tgt_vocab_size, "target")
    p = _np_values(params)
    enc_out, src_pad_mask = np_encode(src_ids, params, config, src_pad_mask)
    src_mask = _key_mask(src_pad_mask)
    causal = _causal_mask(tgt_in_ids.shape[1])
    y = _np_embed(tgt_in_ids, p["tgt_embed"], config)
    for i in range(config.num_layers):
        y = _np_layer_norm(y + _np_attention(y, y, p, f"dec{i}.self", causal, config.num_heads), p, f"dec{i}.ln1")
        y = _np_layer_norm(y + _np_attention(y, enc_out, p, f"dec{i}.cross", src_mask, config.num_heads), p, f"dec{i}.ln2")
        y = _np_layer_norm(y + _np_ffn(y, p, f"dec{i}.ff"), p, f"dec{i}.ln3")
    table = p["tgt_embed"] if config.tie_embeddings else p["out_proj"]
    return y @ table.T


class DecoderSession:
    """Incremental decoding over a fixed encoder output.

    Maintains per-layer key/value caches for B parallel rows; ``step``
    consumes the latest token per row and returns next-token log-probs.
    Rows can be reordered or tiled via ``select_rows`` (beam bookkeeping).
    """

    def __init__(
        self,
        src_ids: np.ndarray,
        params: dict[str, Tensor],
        config: TransformerConfig,
        rows: int = 1,
    ):
        self.p = _np_values(params)
        self.config = config
        enc_out, pad = np_encode(np.asarray(src_ids, dtype=np.int64)[None, :], params, config)
        enc_out = np.repeat(enc_out, rows, axis=0)
        self._cross_mask = np.repeat(_key_mask(pad), rows, axis=0)
        h, d = config.num_heads, config.model_dim
        dk = d // h
        ts = enc_out.shape[1]
        self._cross_k = []
        self._cross_v = []
        for i in range(config.num_layers):
            k = (enc_out @ self.p[f"dec{i}.cross.wk"] + self.p[f"dec{i}.cross.bk"]).reshape(
                rows, ts, h, dk
            ).transpose(0, 2, 1, 3)
            v = (enc_out @ self.p[f"dec{i}.cross.wv"] + self.p[f"dec{i}.cross.bv"]).reshape(
                rows, ts, h, dk
            ).transpose(0, 2, 1, 3)
            self._cross_k.append(k)
            self._cross_v.append(v)
        self._self_k = [np.zeros((rows, h, 0, dk)) for _ in range(config.num_layers)]
        self._self_v = [np.zeros((rows, h, 0, dk)) for _ in range(config.num_layers)]
        self.rows = rows
        self.t = 0

    def select_rows(self, index: np.ndarray) -> None:
        index = np.asarray(index, dtype=np.int64)
        self._cross_k = [k[index] for k in self._cross_k]
        self._cross_v = [v[index] for v in self._cross_v]
        self._cross_mask = self._cross_mask[index]
        self._self_k = [k[index] for k in self._self_k]
        self._self_v = [v[index] for v in self._self_v]
        self.rows = len(index)

    def step(self, tokens: np.ndarray) -> np.ndarray:
        """Advance one position; returns next-token log-probs [rows, V]."""
        cfg = self.config
        p = self.p
        tokens = _check_ids(tokens, cfg.tgt_vocab_size, "target")
        b = self.rows
        h, d = cfg.num_heads, cfg.model_dim
        dk = d // h
        if self.t >= cfg.max_positions:
            raise ValueError(f"decoded past max_positions {cfg.max_positions}")
        x = p["tgt_embed"][tokens] * (d**0.5) + _sinusoidal_table(cfg.max_positions, d)[self.t]
        for i in range(cfg.num_layers):
            pre = f"dec{i}.self"
            q = (x @ p[f"{pre}.wq"] + p[f"{pre}.bq"]).reshape(b, h, 1, dk)
            k = (x @ p[f"{pre}.wk"] + p[f"{pre}.bk"]).reshape(b, h, 1, dk)
            v = (x @ p[f"{pre}.wv"] + p[f"{pre}.bv"]).reshape(b, h, 1, dk)
            self._self_k[i] = np.concatenate([self._self_k[i], k], axis=2)
            self._self_v[i] = np.concatenate([self._self_v[i], v], axis=2)
            scores = q @ self._self_k[i].transpose(0, 1, 3, 2) * (dk**-0.5)
            ctx = (_np_softmax(scores) @ self._self_v[i]).reshape(b, d)
            x = _np_layer_norm(x + (ctx @ p[f"{pre}.wo"] + p[f"{pre}.bo"]), p, f"dec{i}.ln1")

            pre = f"dec{i}.cross"
            q = (x @ p[f"{pre}.wq"] + p[f"{pre}.bq"]).reshape(b, h, 1, dk)
            scores = q @ self._cross_k[i].transpose(0, 1, 3, 2) * (dk**-0.5) + self._cross_mask
            ctx = (_np_softmax(scores) @ self._cross_v[i]).reshape(b, d)
            x = _np_layer_norm(x + (ctx @ p[f"{pre}.wo"] + p[f"{pre}.bo"]), p, f"dec{i}.ln2")

            x = _np_layer_norm(x + _np_ffn(x, p, f"dec{i}.ff"), p, f"dec{i}.ln3")
        table = p["tgt_embed"] if cfg.tie_embeddings else p["out_proj"]
        self.t += 1
        return _np_log_softmax(x @ table.T)


# -- checkpoints ---------------------------------------------------------------


@dataclass
class Checkpoint:
    config: TransformerConfig
    params: dict[str, Tensor]
    optimizer_state: AdamState | None
    training_step: int
    src_vocab_fingerprint: str = ""
    tgt_vocab_fingerprint: str = ""

    def clone_params(self) -> dict[str, Tensor]:
        return {k: Tensor(p.values.copy(), requires_grad=True) for k, p in self.params.items()}

    def save(self, path) -> None:
        blocks: list[tuple[str, str, np.ndarray]] = []
        for name in sorted(self.params):
            blocks.append((name, "param", self.params[name].values))
        if self.optimizer_state is not None:
            for name in sorted(self.optimizer_state.m):
                blocks.append((name, "adam_m", self.optimizer_state.m[name]))
            for name in sorted(self.optimizer_state.v):
                blocks.append((name, "adam_v", self.optimizer_state.v[name]))
        header = {
            "format": "docrepair-checkpoint",
            "version": _CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "training_step": self.training_step,
            "optimizer_step": None if self.optimizer_state is None else self.optimizer_state.step,
            "src_vocab_fingerprint": self.src_vocab_fingerprint,
            "tgt_vocab_fingerprint": self.tgt_vocab_fingerprint,
            "blocks": [
                {"name": name, "kind": kind, "shape": list(arr.shape)}
                for name, kind, arr in blocks
            ],
        }
        header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
        buf = io.BytesIO()
        buf.write(_CHECKPOINT_MAGIC)
        buf.write(struct.pack("<Q", len(header_bytes)))
        buf.write(header_bytes)
        for _, _, arr in blocks:
            buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        with open(path, "wb") as f:
            f.write(buf.getvalue())

    @classmethod
    def load(cls, path) -> "Checkpoint":
        with open(path, "rb") as f:
            raw = f.read()
        if raw[:4] != _CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (header_len,) = struct.unpack("<Q", raw[4:12])
        header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
        if header["version"] != _CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header['version']}")
        config = TransformerConfig.from_dict(header["config"])
        offset = 12 + header_len
        params: dict[str, Tensor] = {}
        moments: dict[str, dict[str, np.ndarray]] = {"adam_m": {}, "adam_v": {}}
        for block in header["blocks"]:
            shape = tuple(block["shape"])
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
            offset += count * 8
            if block["kind"] == "param":
                params[block["name"]] = Tensor(arr, requires_grad=True)
            else:
                moments[block["kind"]][block["name"]] = arr
        state = None
        if header["optimizer_step"] is not None:
            state = AdamState(step=header["optimizer_step"], m=moments["adam_m"], v=moments["adam_v"])
        return cls(
            config=config,
            params=params,
            optimizer_state=state,
            training_step=header["training_step"],
            src_vocab_fingerprint=header["src_vocab_fingerprint"],
            tgt_vocab_fingerprint=header["tgt_vocab_fingerprint"],
        )


def average_checkpoints(checkpoints: list[Checkpoint]) -> Checkpoint:
    """Element-wise parameter mean; optimizer state and step from the latest."""
    if not checkpoints:
        raise ValueError("no checkpoints to average")
    first = checkpoints[0]
    schema = sorted(first.params)
    for ckpt in checkpoints[1:]:
        if ckpt.config != first.config:
            raise ValueError("checkpoint configs differ")
        if sorted(ckpt.params) != schema:
            raise ValueError("checkpoint parameter schemas differ")
        if (
            ckpt.src_vocab_fingerprint != first.src_vocab_fingerprint
            or ckpt.tgt_vocab_fingerprint != first.tgt_vocab_fingerprint
        ):
            raise ValueError("checkpoint vocabulary fingerprints differ")
    latest = max(checkpoints, key=lambda c: c.training_step)
    averaged = {}
    for name in schema:
        base = first.params[name].values
        # mean of deltas from the first: exact when inputs are identical
        delta = np.mean([c.params[name].values - base for c in checkpoints], axis=0)
        averaged[name] = Tensor(base + delta, requires_grad=True)
    return Checkpoint(
        config=replace(first.config),
        params=averaged,
        optimizer_state=latest.optimizer_state,
        training_step=latest.training_step,
        src_vocab_fingerprint=first.src_vocab_fingerprint,
        tgt_vocab_fingerprint=first.tgt_vocab_fingerprint,
    )
