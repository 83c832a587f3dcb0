"""Byte-pair-encoding training, application, and vocabulary management.

Words are whitespace-delimited; the end-of-word marker is carried as a
suffix on each word's final symbol. Reserved control tokens occupy the
lowest ids and are never producible by merges.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

EOW = "</w>"

PAD_ID, BOS_ID, EOS_ID, UNK_ID, SEP_ID = 0, 1, 2, 3, 4
RESERVED_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>", "<sep>")

_MERGES_HEADER = "docrepair-bpe v1"


@dataclass
class MergeTable:
    """Ordered merge rules; earlier rules always apply first."""

    merges: list[tuple[str, str]]
    rank: dict[tuple[str, str], int] = field(init=False)

    def __post_init__(self):
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merge pairs")
        self.rank = {pair: i for i, pair in enumerate(self.merges)}

    def save(self, path) -> None:
        lines = [_MERGES_HEADER] + [f"{a} {b}" for a, b in self.merges]
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "MergeTable":
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0] != _MERGES_HEADER:
            raise ValueError(f"{path}: missing merge-table header {_MERGES_HEADER!r}")
        merges = []
        for line in lines[1:]:
            if not line:
                continue
            left, right = line.split(" ")
            merges.append((left, right))
        return cls(merges)


@dataclass
class Vocabulary:
    """Bijective token<->id maps with reserved control ids at the bottom."""

    id_to_token: list[str]
    token_to_id: dict[str, int] = field(init=False)

    def __post_init__(self):
        if tuple(self.id_to_token[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ValueError("reserved tokens must occupy the lowest ids")
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.id_to_token)

    @property
    def pad_id(self) -> int:
        return PAD_ID

    @property
    def bos_id(self) -> int:
        return BOS_ID

    @property
    def eos_id(self) -> int:
        return EOS_ID

    @property
    def unk_id(self) -> int:
        return UNK_ID

    @property
    def sep_id(self) -> int:
        return SEP_ID

    def fingerprint(self) -> str:
        digest = hashlib.sha256("\n".join(self.id_to_token).encode("utf-8"))
        return digest.hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(self.id_to_token) + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as f:
            tokens = f.read().splitlines()
        return cls(tokens)


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word[:-1]) + (word[-1] + EOW,)


def _pair_counts(word_freqs: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in word_freqs.items():
        for pair in zip(symbols, symbols[1:]):
            counts[pair] += freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    left, right = pair
    merged = left + right
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def bpe_train(corpus: Iterable[str], num_merges: int) -> tuple[MergeTable, Vocabulary]:
    """Learn ``num_merges`` greedy merges, recounting pairs after each one.

    Ties between equal-frequency pairs go to the lexicographically smallest
    pair; a merge whose merged symbol would collide with a reserved token is
    skipped. Training stops early when no pair is left.
    """
    if num_merges < 0:
        raise ValueError(f"num_merges must be non-negative, got {num_merges}")
    word_freqs: Counter = Counter()
    for sentence in corpus:
        for word in sentence.split():
            word_freqs[_word_symbols(word)] += 1
    if not word_freqs:
        raise ValueError("empty corpus")

    base_symbols = sorted({s for word in word_freqs for s in word})
    merges: list[tuple[str, str]] = []
    freqs: dict[tuple[str, ...], int] = dict(word_freqs)
    for _ in range(num_merges):
        counts = _pair_counts(freqs)
        for a, b in list(counts):
            if a + b in RESERVED_TOKENS:
                del counts[(a, b)]
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        merges.append(best)
        rebuilt: dict[tuple[str, ...], int] = {}
        for symbols, freq in freqs.items():
            merged = _merge_word(symbols, best)
            rebuilt[merged] = rebuilt.get(merged, 0) + freq
        freqs = rebuilt

    table = MergeTable(merges)
    tokens = list(RESERVED_TOKENS) + base_symbols
    seen = set(tokens)
    for a, b in merges:
        merged = a + b
        if merged not in seen:
            tokens.append(merged)
            seen.add(merged)
    return table, Vocabulary(tokens)


def _apply_merges(symbols: tuple[str, ...], table: MergeTable) -> tuple[str, ...]:
    rank = table.rank
    while len(symbols) > 1:
        best_rank = None
        best_pair = None
        for pair in zip(symbols, symbols[1:]):
            r = rank.get(pair)
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
                best_pair = pair
        if best_pair is None:
            break
        symbols = _merge_word(symbols, best_pair)
    return symbols


def bpe_encode(text: str, table: MergeTable, vocab: Vocabulary) -> list[int]:
    """Encode whitespace-delimited text; unknown symbols map to UNK.

    Never emits a reserved id other than UNK.
    """
    ids: list[int] = []
    lookup = vocab.token_to_id
    reserved = len(RESERVED_TOKENS)
    for word in text.split():
        for symbol in _apply_merges(_word_symbols(word), table):
            i = lookup.get(symbol)
            ids.append(i if i is not None and i >= reserved else UNK_ID)
    return ids


def bpe_decode(ids: Sequence[int], vocab: Vocabulary) -> str:
    """Concatenate sub-words, restoring spaces at end-of-word markers.

    PAD/BOS/EOS/SEP are stripped; UNK renders as its literal surface form.
    """
    pieces = []
    n = len(vocab)
    for i in ids:
        if not 0 <= i < n:
            raise ValueError(f"token id {i} out of range for vocabulary of {n}")
        if i in (PAD_ID, BOS_ID, EOS_ID, SEP_ID):
            continue
        pieces.append(vocab.id_to_token[i])
    return "".join(pieces).replace(EOW, " ").rstrip(" ")


@dataclass
class SubwordTokenizer:
    """A merge table and its vocabulary, bundled for convenience."""

    table: MergeTable
    vocab: Vocabulary

    def encode(self, text: str) -> list[int]:
        return bpe_encode(text, self.table, self.vocab)

    def decode(self, ids: Sequence[int]) -> str:
        return bpe_decode(ids, self.vocab)

    @classmethod
    def train(cls, corpus: Iterable[str], num_merges: int) -> "SubwordTokenizer":
        table, vocab = bpe_train(corpus, num_merges)
        return cls(table, vocab)

    def save(self, merges_path, vocab_path) -> None:
        self.table.save(merges_path)
        self.vocab.save(vocab_path)

    @classmethod
    def load(cls, merges_path, vocab_path) -> "SubwordTokenizer":
        return cls(MergeTable.load(merges_path), Vocabulary.load(vocab_path))
