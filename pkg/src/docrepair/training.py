"""Training steps and loops for the sentence MT and repair models.

Both loops keep a ring of recent snapshots and return the element-wise
average of the latest five as the final artifact. The repair loop
re-assembles noised examples from the sample pools every epoch and early
stops when neither dev BLEU nor dev consistency has improved for a fixed
number of evaluations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bpe import BOS_ID, EOS_ID, PAD_ID
from .corpus import SentenceGroup, make_batches
from .optim import AdamState, OptimizerConfig, adam_step, zero_grads
from .synth import SamplePool, assemble_example
from .tensor import NonFiniteError, Tensor, cross_entropy, reshape
from .transformer import Checkpoint, TransformerConfig, forward_batch, init_params

Example = tuple[list[int], list[int]]


class NonFiniteLossError(RuntimeError):
    """Training produced a NaN/Inf loss; the step was aborted."""


def _pad_batch(batch: Sequence[Example]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-padded (src+EOS, BOS+tgt, tgt+EOS) arrays for a raw id batch."""
    b = len(batch)
    ts = max(len(src) for src, _ in batch) + 1
    tt = max(len(tgt) for _, tgt in batch) + 1
    src_ids = np.full((b, ts), PAD_ID, dtype=np.int64)
    tgt_in = np.full((b, tt), PAD_ID, dtype=np.int64)
    tgt_out = np.full((b, tt), PAD_ID, dtype=np.int64)
    for i, (src, tgt) in enumerate(batch):
        src_ids[i, : len(src)] = src
        src_ids[i, len(src)] = EOS_ID
        tgt_in[i, 0] = BOS_ID
        tgt_in[i, 1 : 1 + len(tgt)] = tgt
        tgt_out[i, : len(tgt)] = tgt
        tgt_out[i, len(tgt)] = EOS_ID
    return src_ids, tgt_in, tgt_out


def train_step(
    batch: Sequence[Example],
    params: dict[str, Tensor],
    state: AdamState,
    config: TransformerConfig,
    opt_cfg: OptimizerConfig,
    rng: np.random.Generator,
) -> float:
    """One smoothed-cross-entropy + Adam update; returns the batch loss."""
    if not batch:
        raise ValueError("empty batch")
    src_ids, tgt_in, tgt_out = _pad_batch(batch)
    try:
        logits = forward_batch(src_ids, tgt_in, params, config, train_mode=True, rng=rng)
        b, t, v = logits.shape
        flat = reshape(logits, (b * t, v))
        mask = (tgt_out != PAD_ID).ravel()
        loss = cross_entropy(flat, tgt_out.ravel(), config.label_smoothing, mask=mask)
    except NonFiniteError as exc:
        raise NonFiniteLossError(str(exc)) from exc
    value = loss.item()
    if not np.isfinite(value):
        raise NonFiniteLossError(f"non-finite loss at optimizer step {state.step + 1}")
    zero_grads(params)
    loss.backward()
    grads = {k: p.grad for k, p in params.items() if p.grad is not None}
    adam_step(params, grads, state, opt_cfg)
    return value


def _snapshot(
    params: dict[str, Tensor],
    state: AdamState,
    step: int,
    config: TransformerConfig,
    fingerprints: tuple[str, str],
) -> Checkpoint:
    return Checkpoint(
        config=config,
        params={k: Tensor(p.values.copy(), requires_grad=True) for k, p in params.items()},
        optimizer_state=AdamState(
            step=state.step,
            m={k: v.copy() for k, v in state.m.items()},
            v={k: v.copy() for k, v in state.v.items()},
        ),
        training_step=step,
        src_vocab_fingerprint=fingerprints[0],
        tgt_vocab_fingerprint=fingerprints[1],
    )


def _average_ring(ring: list[Checkpoint]) -> Checkpoint:
    from .transformer import average_checkpoints

    return average_checkpoints(ring[-5:])


@dataclass
class MtTrainResult:
    checkpoint: Checkpoint
    losses: list[float]
    snapshots: list[Checkpoint]
    diverged: bool = False


def fit_sentence_mt(
    examples: list[Example],
    config: TransformerConfig,
    opt_cfg: OptimizerConfig,
    *,
    batch_tokens: int,
    max_steps: int,
    checkpoint_every: int,
    seed: int,
    fingerprints: tuple[str, str] = ("", ""),
) -> MtTrainResult:
    """Train on sentence pairs; final artifact averages the 5 latest snapshots.

    A non-finite loss aborts training and returns the last good snapshot
    average with ``diverged`` set.
    """
    if not examples:
        raise ValueError("no training examples")
    params = init_params(config, np.random.default_rng([seed, 0]))
    state = AdamState.for_params(params)
    dropout_rng = np.random.default_rng([seed, 1])
    ring: list[Checkpoint] = []
    losses: list[float] = []
    step = 0
    epoch = 0
    diverged = False
    while step < max_steps and not diverged:
        batches = make_batches(examples, batch_tokens, np.random.default_rng([seed, 2, epoch]))
        for batch in batches:
            try:
                losses.append(train_step(batch, params, state, config, opt_cfg, dropout_rng))
            except NonFiniteLossError:
                diverged = True
                break
            step += 1
            if step % checkpoint_every == 0 or step == max_steps:
                ring.append(_snapshot(params, state, step, config, fingerprints))
                ring[:] = ring[-5:]
            if step >= max_steps:
                break
        epoch += 1
    if not ring:
        ring.append(_snapshot(params, state, step, config, fingerprints))
    return MtTrainResult(
        checkpoint=_average_ring(ring), losses=losses, snapshots=list(ring), diverged=diverged
    )


@dataclass
class RepairTrainResult:
    checkpoint: Checkpoint
    metrics: list[dict]
    stopped_early: bool = False


def fit_docrepair(
    groups: list[SentenceGroup],
    pool: SamplePool,
    tokenizer,
    config: TransformerConfig,
    opt_cfg: OptimizerConfig,
    *,
    p_noise: float,
    batch_tokens: int,
    max_steps: int,
    eval_every: int,
    patience: int,
    seed: int,
    eval_fn: Callable[[dict[str, Tensor]], dict[str, float]],
    fingerprints: tuple[str, str] = ("", ""),
    metrics_path=None,
    dense_eval_until: int = 0,
) -> RepairTrainResult:
    """Epoch-wise repair training with dual-criterion early stopping.

    ``eval_fn`` must return at least ``bleu_vs_reference``, ``bleu_vs_input``
    and ``consistency_mean``; evaluation happens every ``eval_every`` steps
    (every ``eval_every // 3`` until ``dense_eval_until``, which makes the
    early copy regime visible in the metrics log), a snapshot is taken at
    each evaluation, and training stops once neither dev BLEU nor dev
    consistency has set a new best for ``patience`` consecutive evaluations
    (or at ``max_steps``).
    """
    if not groups:
        raise ValueError("no training groups")
    if eval_every < 1 or patience < 1:
        raise ValueError("eval_every and patience must be positive")
    params = init_params(config, np.random.default_rng([seed, 10]))
    state = AdamState.for_params(params)
    dropout_rng = np.random.default_rng([seed, 11])
    ring: list[Checkpoint] = []
    metrics: list[dict] = []
    best_bleu = -np.inf
    best_consistency = -np.inf
    stale = 0
    step = 0
    epoch = 0
    window: list[float] = []
    stop = False

    def evaluate() -> None:
        nonlocal best_bleu, best_consistency, stale, stop
        scores = eval_fn(params)
        entry = {
            "step": step,
            "epoch": epoch,
            "train_loss": float(np.mean(window)) if window else None,
            **{k: float(v) for k, v in scores.items()},
        }
        metrics.append(entry)
        if metrics_path is not None:
            with open(metrics_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, sort_keys=True) + "\n")
        window.clear()
        improved = False
        if scores["bleu_vs_reference"] > best_bleu:
            best_bleu = scores["bleu_vs_reference"]
            improved = True
        if scores["consistency_mean"] > best_consistency:
            best_consistency = scores["consistency_mean"]
            improved = True
        stale = 0 if improved else stale + 1
        if stale >= patience:
            stop = True
        ring.append(_snapshot(params, state, step, config, fingerprints))
        ring[:] = ring[-5:]

    dense_every = max(1, eval_every // 3)

    def due(at_step: int) -> bool:
        if at_step <= dense_eval_until:
            return at_step % dense_every == 0
        return at_step % eval_every == 0

    while step < max_steps and not stop:
        assembly_rng = np.random.default_rng([seed, 12, epoch])
        examples = [
            (ex.input_ids, ex.target_ids)
            for ex in (
                assemble_example(g, pool, p_noise, assembly_rng, tokenizer) for g in groups
            )
        ]
        batches = make_batches(examples, batch_tokens, np.random.default_rng([seed, 13, epoch]))
        for batch in batches:
            window.append(train_step(batch, params, state, config, opt_cfg, dropout_rng))
            step += 1
            if due(step):
                evaluate()
            if step >= max_steps or stop:
                break
        epoch += 1
    if not ring or ring[-1].training_step != step:
        ring.append(_snapshot(params, state, step, config, fingerprints))
        ring[:] = ring[-5:]
    return RepairTrainResult(
        checkpoint=_average_ring(ring), metrics=metrics, stopped_early=stop
    )
