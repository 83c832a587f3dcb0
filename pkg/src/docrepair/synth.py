"""Training-pair construction for the repair model.

Per target-language sentence, a pool of degraded paraphrases is built
either by round-trip translation (beam back-translation, then temperature
sampling back into the target language) or by sampling directly from a
genuine parallel source (one-way mode). Assembly picks one pool member per
sentence, joins the group with SEP, and noises the input side only.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bpe import RESERVED_TOKENS, SubwordTokenizer
from .corpus import SentenceGroup, concat_ids
from .decoding import beam_search, sample_many
from .transformer import Checkpoint

ROUND_TRIP = "round_trip"
ONE_WAY = "one_way"


def sentence_rng(seed: int, doc_id: str, index: int) -> np.random.Generator:
    """Generator derived from (seed, sentence key): sampling one sentence is
    independent of every other sentence's, which keeps pool construction
    per-sentence isolated and embarrassingly parallel."""
    digest = hashlib.sha256(f"{doc_id}:{index}".encode("utf-8")).digest()[:8]
    return np.random.default_rng([seed, int.from_bytes(digest, "little")])


@dataclass
class PoolEntry:
    """Precomputed degraded translations of one sentence."""

    samples: list[list[int]]
    provenance: str
    back_translation: list[int] | None = None
    decode_ok: bool = True


@dataclass
class SamplePool:
    """Entries keyed by (doc_id, sentence index); every entry has n samples."""

    n: int
    entries: dict[tuple[str, int], PoolEntry] = field(default_factory=dict)

    def add(self, doc_id: str, index: int, entry: PoolEntry) -> None:
        if len(entry.samples) != self.n:
            raise ValueError(f"pool entry has {len(entry.samples)} samples, expected {self.n}")
        self.entries[(doc_id, index)] = entry

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def merge(self, other: "SamplePool") -> None:
        if other.n != self.n:
            raise ValueError("pool sizes differ")
        self.entries.update(other.entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps({"format": "docrepair-pool", "version": 1, "n": self.n}) + "\n")
            for (doc_id, index), e in sorted(self.entries.items()):
                record = {
                    "doc_id": doc_id,
                    "index": index,
                    "provenance": e.provenance,
                    "decode_ok": e.decode_ok,
                    "back_translation": e.back_translation,
                    "samples": e.samples,
                }
                f.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SamplePool":
        with open(path, encoding="utf-8") as f:
            header = json.loads(f.readline())
            if header.get("format") != "docrepair-pool" or header.get("version") != 1:
                raise ValueError(f"{path}: not a v1 sample-pool file")
            pool = cls(n=header["n"])
            for line in f:
                line = line.strip()
                if not line:
                    continue
                r = json.loads(line)
                pool.add(
                    r["doc_id"],
                    r["index"],
                    PoolEntry(
                        samples=[list(map(int, s)) for s in r["samples"]],
                        provenance=r["provenance"],
                        back_translation=None
                        if r["back_translation"] is None
                        else list(map(int, r["back_translation"])),
                        decode_ok=r["decode_ok"],
                    ),
                )
        return pool


@dataclass
class RepairExample:
    """One training pair: degraded group in, original consistent group out."""

    input_ids: list[int]
    target_ids: list[int]
    provenance: str


def round_trip(
    group: SentenceGroup,
    rev_ckpt: Checkpoint,
    fwd_ckpt: Checkpoint,
    tokenizer: SubwordTokenizer,
    n_samples: int,
    temperature: float,
    seed: int,
    beam_size: int = 4,
) -> SamplePool:
    """Beam back-translation then n sampled forward translations per sentence.

    Each sentence is processed in isolation; a failed decode (budget hit
    before EOS) is flagged on the entry rather than raised.
    """
    if rev_ckpt.config.tgt_vocab_size != fwd_ckpt.config.src_vocab_size:
        raise ValueError("reverse output vocabulary does not match forward input vocabulary")
    pool = SamplePool(n=n_samples)
    for j, sentence in enumerate(group.sentences):
        ids = tokenizer.encode(sentence)
        bt = beam_search(ids, rev_ckpt.params, rev_ckpt.config, beam_size=beam_size)
        rng = sentence_rng(seed, group.doc_id, group.start + j)
        hyps = sample_many(
            bt.content, fwd_ckpt.params, fwd_ckpt.config, n_samples, temperature, rng
        )
        pool.add(
            group.doc_id,
            group.start + j,
            PoolEntry(
                samples=[h.content for h in hyps],
                provenance=ROUND_TRIP,
                back_translation=bt.content,
                decode_ok=bt.finished and all(h.finished for h in hyps),
            ),
        )
    return pool


def one_way_samples(
    src_group: SentenceGroup,
    fwd_ckpt: Checkpoint,
    src_tokenizer: SubwordTokenizer,
    n_samples: int,
    temperature: float,
    seed: int,
) -> SamplePool:
    """n sampled translations of the true source per sentence (parallel data)."""
    pool = SamplePool(n=n_samples)
    for j, sentence in enumerate(src_group.sentences):
        if sentence is None or not sentence.strip():
            raise ValueError(
                f"missing source sentence at ({src_group.doc_id}, {src_group.start + j})"
            )
        ids = src_tokenizer.encode(sentence)
        rng = sentence_rng(seed, src_group.doc_id, src_group.start + j)
        hyps = sample_many(ids, fwd_ckpt.params, fwd_ckpt.config, n_samples, temperature, rng)
        pool.add(
            src_group.doc_id,
            src_group.start + j,
            PoolEntry(
                samples=[h.content for h in hyps],
                provenance=ONE_WAY,
                decode_ok=all(h.finished for h in hyps),
            ),
        )
    return pool


def noise_tokens(
    ids: Sequence[int],
    p: float,
    vocab_size: int,
    rng: np.random.Generator,
    return_attempts: bool = False,
):
    """Replace each non-reserved token with probability p by a uniform draw
    over the non-reserved vocabulary (the draw may equal the original).

    Reserved ids (PAD/BOS/EOS/UNK/SEP) are neither replaced nor drawn.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise probability must be in [0, 1], got {p}")
    reserved = len(RESERVED_TOKENS)
    ids = np.asarray(ids, dtype=np.int64)
    out = ids.copy()
    eligible = ids >= reserved
    attempts = 0
    if p > 0.0 and ids.size:
        if vocab_size <= reserved:
            raise ValueError("vocabulary has no non-reserved tokens to draw from")
        hit = (rng.random(ids.size) < p) & eligible
        attempts = int(hit.sum())
        out[hit] = rng.integers(reserved, vocab_size, size=attempts)
    result = out.tolist()
    if return_attempts:
        return result, attempts
    return result


def assemble_example(
    group: SentenceGroup,
    pool: SamplePool,
    p_noise: float,
    rng: np.random.Generator,
    tokenizer: SubwordTokenizer,
) -> RepairExample:
    """Pick one pool member per sentence, join with SEP, noise the input side.

    The target side is the group's own encoding, bit-identical to the
    monolingual data; noise never touches it.
    """
    chosen: list[list[int]] = []
    provenances: set[str] = set()
    for j in range(len(group.sentences)):
        key = (group.doc_id, group.start + j)
        if key not in pool:
            raise ValueError(f"pool gap at {key}")
        entry = pool.entries[key]
        chosen.append(entry.samples[int(rng.integers(pool.n))])
        provenances.add(entry.provenance)
    input_ids = concat_ids(chosen)
    input_ids = noise_tokens(input_ids, p_noise, len(tokenizer.vocab), rng)
    target_ids = concat_ids([tokenizer.encode(s) for s in group.sentences])
    provenance = provenances.pop() if len(provenances) == 1 else "mixed"
    return RepairExample(input_ids=input_ids, target_ids=target_ids, provenance=provenance)


# -- example shards ---------------------------------------------------------------


def save_examples(examples: Sequence[RepairExample], input_path, target_path, manifest_path) -> None:
    """Paired input/target id files (space-separated per line) plus a manifest."""
    with open(input_path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(" ".join(map(str, ex.input_ids)) + "\n")
    with open(target_path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(" ".join(map(str, ex.target_ids)) + "\n")
    counts: dict[str, int] = {}
    for ex in examples:
        counts[ex.provenance] = counts.get(ex.provenance, 0) + 1
    manifest = {
        "format": "docrepair-examples",
        "version": 1,
        "count": len(examples),
        "provenance_counts": counts,
        "input_file": str(input_path),
        "target_file": str(target_path),
    }
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_examples(input_path, target_path, manifest_path=None) -> list[RepairExample]:
    with open(input_path, encoding="utf-8") as f:
        inputs = [list(map(int, line.split())) for line in f]
    with open(target_path, encoding="utf-8") as f:
        targets = [list(map(int, line.split())) for line in f]
    if len(inputs) != len(targets):
        raise ValueError("input/target shard line counts differ")
    provenance = "unknown"
    if manifest_path is not None:
        with open(manifest_path, encoding="utf-8") as f:
            manifest = json.load(f)
        counts = manifest.get("provenance_counts", {})
        if len(counts) == 1:
            provenance = next(iter(counts))
    return [RepairExample(i, t, provenance) for i, t in zip(inputs, targets)]
