"""Document ingestion, group extraction, overlap filtering, and batching.

File formats (see docs/FORMATS.md for examples):

* monolingual: UTF-8 text, one sentence per line, blank line between
  documents;
* timed: tab-separated ``doc_id<TAB>start<TAB>end<TAB>text``;
* parallel: two timed files plus an alignment file of ``i<TAB>j``
  0-based line-index pairs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bpe import SEP_ID, SubwordTokenizer

Interval = tuple[float, float]


@dataclass
class Document:
    doc_id: str
    sentences: list[str]
    intervals: list[Interval] | None = None

    def __post_init__(self):
        if self.intervals is not None:
            if len(self.intervals) != len(self.sentences):
                raise ValueError(f"document {self.doc_id}: interval/sentence count mismatch")
            for start, end in self.intervals:
                if start > end:
                    raise ValueError(f"document {self.doc_id}: interval start {start} > end {end}")

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass
class SentenceGroup:
    """k consecutive sentences from a single document."""

    doc_id: str
    start: int
    sentences: list[str]


@dataclass
class ParallelDocument:
    doc_id: str
    source_sentences: list[str]
    target_sentences: list[str]
    source_intervals: list[Interval] | None = None
    target_intervals: list[Interval] | None = None

    def __post_init__(self):
        if len(self.source_sentences) != len(self.target_sentences):
            raise ValueError(f"parallel document {self.doc_id}: side lengths differ")


@dataclass
class AlignedPair:
    doc_id: str
    source: str
    target: str
    source_interval: Interval | None = None
    target_interval: Interval | None = None
    overlap: float = field(default=1.0)


def group_fingerprint(sentences: Sequence[str]) -> str:
    """Hash of the lowercased, whitespace-collapsed concatenated group text."""
    normalized = " ".join(" ".join(sentences).lower().split())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def extract_groups(
    doc: Document,
    k: int,
    stride: int = 1,
    exclusions: set[str] | None = None,
) -> list[SentenceGroup]:
    """Windows [i, i+k) for i = 0, stride, 2*stride, ... while i+k <= len(doc).

    The whole document is dropped when any of its windows hashes into the
    exclusion set. Short documents yield no groups.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    groups = []
    for i in range(0, len(doc.sentences) - k + 1, stride):
        window = doc.sentences[i : i + k]
        if exclusions and group_fingerprint(window) in exclusions:
            return []
        groups.append(SentenceGroup(doc.doc_id, i, window))
    return groups


def relative_overlap(a: Interval, b: Interval, mode: str = "iou") -> float:
    """Interval overlap in [0, 1]: intersection over union by default.

    ``mode="over_max"`` divides by the longer interval instead. Two
    identical zero-length intervals score 1; any other degenerate case
    falls out of the formula as 0.
    """
    for start, end in (a, b):
        if start > end:
            raise ValueError(f"interval start {start} > end {end}")
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter < 0.0:
        return 0.0
    if mode == "iou":
        denom = (a[1] - a[0]) + (b[1] - b[0]) - inter
    elif mode == "over_max":
        denom = max(a[1] - a[0], b[1] - b[0])
    else:
        raise ValueError(f"unknown overlap mode {mode!r}")
    if denom == 0.0:
        return 1.0  # identical zero-length intervals
    return inter / denom


def filter_pairs_by_overlap(
    pairs: Iterable[AlignedPair], threshold: float = 0.9
) -> list[AlignedPair]:
    return [p for p in pairs if p.overlap >= threshold]


# -- group <-> token sequence --------------------------------------------------


def concat_ids(sentence_ids: Sequence[Sequence[int]]) -> list[int]:
    """Join encoded sentences with exactly one SEP between adjacent ones."""
    out: list[int] = []
    for i, ids in enumerate(sentence_ids):
        if i:
            out.append(SEP_ID)
        out.extend(ids)
    return out


def concat_group(group: SentenceGroup, tokenizer: SubwordTokenizer) -> list[int]:
    return concat_ids([tokenizer.encode(s) for s in group.sentences])


def split_ids(ids: Sequence[int]) -> list[list[int]]:
    """Split on SEP; m separators yield m+1 segments, empties preserved."""
    segments: list[list[int]] = [[]]
    for i in ids:
        if i == SEP_ID:
            segments.append([])
        else:
            segments[-1].append(int(i))
    return segments


def split_group(ids: Sequence[int], tokenizer: SubwordTokenizer) -> list[str]:
    return [tokenizer.decode(segment) for segment in split_ids(ids)]


# -- batching -------------------------------------------------------------------


def make_batches(
    examples: Sequence[tuple[list[int], list[int]]],
    max_source_tokens: int,
    rng: np.random.Generator,
) -> list[list[tuple[list[int], list[int]]]]:
    """Length-sorted greedy chunking under a source-token budget.

    Ties in length keep original corpus order; the resulting batch order is
    shuffled with the supplied generator.
    """
    if not examples:
        return []
    longest = max(len(inp) for inp, _ in examples)
    if longest > max_source_tokens:
        raise ValueError(
            f"an example has {longest} source tokens, over the budget {max_source_tokens}"
        )
    ordered = sorted(examples, key=lambda ex: len(ex[0]))
    batches: list[list[tuple[list[int], list[int]]]] = []
    current: list[tuple[list[int], list[int]]] = []
    current_tokens = 0
    for ex in ordered:
        n = len(ex[0])
        if current and current_tokens + n > max_source_tokens:
            batches.append(current)
            current = []
            current_tokens = 0
        current.append(ex)
        current_tokens += n
    if current:
        batches.append(current)
    order = rng.permutation(len(batches))
    return [batches[i] for i in order]


# -- file IO --------------------------------------------------------------------


def read_monolingual(path) -> list[Document]:
    """One sentence per line, blank line between documents."""
    docs: list[Document] = []
    current: list[str] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                if current:
                    docs.append(Document(f"d{len(docs):06d}", current))
                    current = []
            else:
                current.append(line)
    if current:
        docs.append(Document(f"d{len(docs):06d}", current))
    return docs


def write_monolingual(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, doc in enumerate(docs):
            if i:
                f.write("\n")
            for sentence in doc.sentences:
                f.write(sentence + "\n")


def read_timed(path) -> list[Document]:
    """Tab-separated doc_id, start, end, text; lines grouped by doc_id runs."""
    docs: list[Document] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno + 1}: expected 4 tab-separated fields")
            doc_id, start, end, text = parts
            interval = (float(start), float(end))
            if docs and docs[-1].doc_id == doc_id:
                docs[-1].sentences.append(text)
                docs[-1].intervals.append(interval)
            else:
                docs.append(Document(doc_id, [text], [interval]))
    for doc in docs:
        Document(doc.doc_id, doc.sentences, doc.intervals)  # re-validate
    return docs


def write_timed(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in docs:
            intervals = doc.intervals or [(float(i), float(i + 1)) for i in range(len(doc))]
            for (start, end), text in zip(intervals, doc.sentences):
                f.write(f"{doc.doc_id}\t{start:g}\t{end:g}\t{text}\n")


def read_alignment(path) -> list[tuple[int, int]]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno + 1}: expected 2 tab-separated indices")
            pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def write_alignment(pairs: Iterable[tuple[int, int]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, j in pairs:
            f.write(f"{i}\t{j}\n")


def read_parallel(src_path, tgt_path, align_path, overlap_mode: str = "iou") -> list[AlignedPair]:
    """Line-aligned sentence pairs with their relative time overlap."""
    src_docs = read_timed(src_path)
    tgt_docs = read_timed(tgt_path)
    src_lines = [(d, i) for d in src_docs for i in range(len(d))]
    tgt_lines = [(d, i) for d in tgt_docs for i in range(len(d))]
    pairs: list[AlignedPair] = []
    for si, ti in read_alignment(align_path):
        if not (0 <= si < len(src_lines) and 0 <= ti < len(tgt_lines)):
            raise ValueError(f"alignment ({si}, {ti}) out of range")
        sdoc, soff = src_lines[si]
        tdoc, toff = tgt_lines[ti]
        s_int = sdoc.intervals[soff]
        t_int = tdoc.intervals[toff]
        pairs.append(
            AlignedPair(
                doc_id=tdoc.doc_id,
                source=sdoc.sentences[soff],
                target=tdoc.sentences[toff],
                source_interval=s_int,
                target_interval=t_int,
                overlap=relative_overlap(s_int, t_int, overlap_mode),
            )
        )
    return pairs


def parallel_documents(pairs: Iterable[AlignedPair]) -> list[ParallelDocument]:
    """Group aligned pairs into parallel documents by doc_id runs."""
    docs: list[ParallelDocument] = []
    for pair in pairs:
        if docs and docs[-1].doc_id == pair.doc_id:
            docs[-1].source_sentences.append(pair.source)
            docs[-1].target_sentences.append(pair.target)
        else:
            docs.append(ParallelDocument(pair.doc_id, [pair.source], [pair.target]))
    return docs
