"""Beam search, temperature sampling, and forced scoring.

The search loops run against a minimal stepper interface (``step`` returns
next-token log-probs for a batch of rows, ``select_rows`` reorders beam
state), so they work for the Transformer and for table-driven models alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .bpe import BOS_ID, EOS_ID, PAD_ID
from .tensor import Tensor
from .transformer import DecoderSession, TransformerConfig, _np_log_softmax, np_forward

GREEDY_TEMPERATURE = 1e-8  # below this, sampling is exact argmax


@dataclass
class Hypothesis:
    """A (possibly unfinished) decode: ids end with EOS iff finished."""

    ids: list[int]
    logprob: float
    finished: bool

    @property
    def content(self) -> list[int]:
        """Token ids without the trailing EOS."""
        return self.ids[:-1] if self.finished else list(self.ids)


class Stepper(Protocol):
    rows: int

    def step(self, tokens: np.ndarray) -> np.ndarray: ...

    def select_rows(self, index: np.ndarray) -> None: ...


def run_beam(
    stepper: Stepper,
    beam_size: int,
    max_len: int,
    bos_id: int = BOS_ID,
    eos_id: int = EOS_ID,
) -> Hypothesis:
    """Standard beam search: global top-k expansion, finished set kept.

    EOS-ending candidates retire from the live set without refill, which
    makes beam_size=1 coincide exactly with greedy argmax decoding. Search
    stops once no live prefix can strictly beat the best finished score.
    """
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    if stepper.rows != 1:
        raise ValueError("stepper must start with a single row")
    live_seqs: list[list[int]] = [[]]
    live_scores = np.zeros(1)
    tokens = np.array([bos_id])
    finished: list[Hypothesis] = []
    for _ in range(max_len):
        logp = stepper.step(tokens)
        vocab = logp.shape[1]
        flat = (live_scores[:, None] + logp).ravel()
        k = min(beam_size, flat.size)
        # score desc, then (row, token) asc: deterministic tie-breaking
        order = np.lexsort((np.arange(flat.size), -flat))[:k]
        keep_rows: list[int] = []
        next_tokens: list[int] = []
        new_seqs: list[list[int]] = []
        new_scores: list[float] = []
        for idx in order:
            row, tok = divmod(int(idx), vocab)
            seq = live_seqs[row] + [tok]
            if tok == eos_id:
                finished.append(Hypothesis(seq, float(flat[idx]), True))
            else:
                keep_rows.append(row)
                next_tokens.append(tok)
                new_seqs.append(seq)
                new_scores.append(float(flat[idx]))
        if not new_seqs:
            break
        live_seqs = new_seqs
        live_scores = np.array(new_scores)
        tokens = np.array(next_tokens)
        stepper.select_rows(np.array(keep_rows))
        if finished and live_scores.max() < max(h.logprob for h in finished):
            break
    if finished:
        return sorted(finished, key=lambda h: -h.logprob)[0]
    best = int(np.argmax(live_scores))
    return Hypothesis(live_seqs[best], float(live_scores[best]), False)


def run_sample(
    stepper: Stepper,
    n: int,
    temperature: float,
    rng: np.random.Generator,
    max_len: int,
    bos_id: int = BOS_ID,
    eos_id: int = EOS_ID,
    pad_id: int = PAD_ID,
) -> list[Hypothesis]:
    """Draw n sequences token-by-token from softmax(logits / temperature).

    Reported log-probs are the model's own (untempered). rng draws are
    consumed for every row each step, finished or not, so the stream depends
    only on (n, max_len).
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if stepper.rows != n:
        raise ValueError(f"stepper must start with {n} rows")
    seqs: list[list[int]] = [[] for _ in range(n)]
    scores = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    tokens = np.full(n, bos_id)
    for _ in range(max_len):
        logp = stepper.step(tokens)
        if temperature < GREEDY_TEMPERATURE:
            picks = logp.argmax(axis=1)
            _ = rng.random(n)
        else:
            probs = np.exp(logp / temperature)
            probs /= probs.sum(axis=1, keepdims=True)
            u = rng.random(n)
            cdf = probs.cumsum(axis=1)
            picks = np.minimum(
                (cdf < u[:, None]).sum(axis=1), logp.shape[1] - 1
            )
        tokens = np.where(alive, picks, pad_id)
        for i in range(n):
            if not alive[i]:
                continue
            tok = int(picks[i])
            seqs[i].append(tok)
            scores[i] += logp[i, tok]
            if tok == eos_id:
                alive[i] = False
        if not alive.any():
            break
    return [
        Hypothesis(seqs[i], float(scores[i]), bool(seqs[i] and seqs[i][-1] == eos_id))
        for i in range(n)
    ]


# -- Transformer front ends ----------------------------------------------------


def default_max_len(src_len: int, config: TransformerConfig) -> int:
    return min(2 * src_len + 8, config.max_positions)


def _with_eos(ids) -> np.ndarray:
    return np.concatenate([np.asarray(ids, dtype=np.int64), [EOS_ID]])


def _session(src_ids, params, config, rows: int) -> DecoderSession:
    return DecoderSession(_with_eos(src_ids), params, config, rows=rows)


def beam_search(
    src_ids: Sequence[int],
    params: dict[str, Tensor],
    config: TransformerConfig,
    beam_size: int = 4,
    max_len: int | None = None,
) -> Hypothesis:
    """Best hypothesis over beam widths 1..beam_size; deterministic.

    A single fixed-width run is not monotone in width (a prefix pruned at
    width b can finish better than everything width b+1 keeps), so the
    returned result is the best across all widths up to beam_size. Width 1
    is exactly greedy decoding, and widening can only improve the score.
    """
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    if max_len is None:
        max_len = default_max_len(len(src_ids), config)
    best: Hypothesis | None = None
    for width in range(1, beam_size + 1):
        hyp = run_beam(_session(src_ids, params, config, 1), width, max_len)
        if best is None or _better(hyp, best):
            best = hyp
    return best


def _better(a: Hypothesis, b: Hypothesis) -> bool:
    if a.finished != b.finished:
        return a.finished
    return a.logprob > b.logprob


def sample(
    src_ids: Sequence[int],
    params: dict[str, Tensor],
    config: TransformerConfig,
    temperature: float,
    rng: np.random.Generator,
    max_len: int | None = None,
) -> Hypothesis:
    return sample_many(src_ids, params, config, 1, temperature, rng, max_len)[0]


def sample_many(
    src_ids: Sequence[int],
    params: dict[str, Tensor],
    config: TransformerConfig,
    n: int,
    temperature: float,
    rng: np.random.Generator,
    max_len: int | None = None,
) -> list[Hypothesis]:
    if max_len is None:
        max_len = default_max_len(len(src_ids), config)
    return run_sample(_session(src_ids, params, config, n), n, temperature, rng, max_len)


def score(
    src_ids: Sequence[int],
    tgt_ids: Sequence[int],
    params: dict[str, Tensor],
    config: TransformerConfig,
) -> float:
    """Total log-probability of tgt (EOS included), no length normalization."""
    return score_many(src_ids, [tgt_ids], params, config)[0]


def score_many(
    src_ids: Sequence[int],
    candidates: Sequence[Sequence[int]],
    params: dict[str, Tensor],
    config: TransformerConfig,
) -> list[float]:
    """Forced scores for several candidates against one source."""
    if not candidates:
        return []
    if any(len(c) == 0 for c in candidates):
        raise ValueError("cannot score an empty target")
    src = _with_eos(src_ids)
    rows = len(candidates)
    width = max(len(c) for c in candidates) + 1  # BOS-shifted input length
    tgt_in = np.full((rows, width), PAD_ID, dtype=np.int64)
    tgt_out = np.full((rows, width), PAD_ID, dtype=np.int64)
    for i, cand in enumerate(candidates):
        ids = np.asarray(cand, dtype=np.int64)
        tgt_in[i, 0] = BOS_ID
        tgt_in[i, 1 : 1 + len(ids)] = ids
        tgt_out[i, : len(ids)] = ids
        tgt_out[i, len(ids)] = EOS_ID
    logits = np_forward(np.tile(src, (rows, 1)), tgt_in, params, config)
    logp = _np_log_softmax(logits)
    out: list[float] = []
    for i, cand in enumerate(candidates):
        n = len(cand) + 1
        out.append(float(logp[i, np.arange(n), tgt_out[i, :n]].sum()))
    return out
