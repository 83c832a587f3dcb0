"""Corpus BLEU, contrastive consistency accuracy, and repair change stats."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

PHENOMENA = ("deixis", "lex_cohesion", "ellipsis_infl", "ellipsis_vp")


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: Sequence[str], references: Sequence[str], lowercase: bool = True) -> float:
    """Corpus-level BLEU-4 with brevity penalty, no smoothing.

    Whitespace tokenization after optional lowercasing; a zero modified
    precision at any order forces a zero score.
    """
    if not hypotheses:
        raise ValueError("empty corpus")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    matched = [0] * 4
    total = [0] * 4
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        if lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        hyp_tokens = hyp.split()
        ref_tokens = ref.split()
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, 5):
            hyp_counts = _ngram_counts(hyp_tokens, n)
            ref_counts = _ngram_counts(ref_tokens, n)
            total[n - 1] += max(len(hyp_tokens) - n + 1, 0)
            matched[n - 1] += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    if hyp_len == 0 or any(m == 0 for m in matched):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matched, total)) / 4.0
    brevity = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    return 100.0 * brevity * math.exp(log_precision)


# -- contrastive evaluation -----------------------------------------------------


@dataclass
class ContrastiveInstance:
    """A true translation group against minimally different wrong ones."""

    source: list[str]
    context: list[str]
    true_group: list[str]
    contrastive_groups: list[list[str]]
    phenomenon: str
    distance: int | None = None

    def __post_init__(self):
        if self.phenomenon not in PHENOMENA:
            raise ValueError(f"unknown phenomenon {self.phenomenon!r}")
        if not self.contrastive_groups:
            raise ValueError("instance needs at least one contrastive group")
        k = len(self.true_group)
        for group in self.contrastive_groups:
            if len(group) != k:
                raise ValueError("candidate groups must have the same sentence count")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "context": self.context,
            "true": self.true_group,
            "contrastive": self.contrastive_groups,
            "phenomenon": self.phenomenon,
            "distance": self.distance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContrastiveInstance":
        return cls(
            source=list(d["source"]),
            context=list(d["context"]),
            true_group=list(d["true"]),
            contrastive_groups=[list(g) for g in d["contrastive"]],
            phenomenon=d["phenomenon"],
            distance=d["distance"],
        )


def read_suite(path) -> list[ContrastiveInstance]:
    instances = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            try:
                instances.append(ContrastiveInstance.from_dict(json.loads(line)))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno + 1}: bad instance: {exc}") from exc
    return instances


def write_suite(instances: Iterable[ContrastiveInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            f.write(json.dumps(inst.to_dict(), sort_keys=True) + "\n")


@dataclass
class ContrastiveReport:
    correct: int
    total: int
    by_phenomenon: dict[str, tuple[int, int]]
    by_distance: dict[str, dict[int | None, tuple[int, int]]]

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def phenomenon_accuracy(self, phenomenon: str) -> float:
        c, t = self.by_phenomenon.get(phenomenon, (0, 0))
        return c / t if t else 0.0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "by_phenomenon": {
                p: {"correct": c, "total": t, "accuracy": c / t if t else 0.0}
                for p, (c, t) in sorted(self.by_phenomenon.items())
            },
            "by_distance": {
                p: {
                    str(d): {"correct": c, "total": t, "accuracy": c / t if t else 0.0}
                    for d, (c, t) in sorted(dist.items(), key=lambda kv: (kv[0] is None, kv[0]))
                }
                for p, dist in sorted(self.by_distance.items())
            },
        }

    def format_table(self) -> str:
        """Accuracy per phenomenon, split out by context distance."""
        distances = sorted(
            {d for dist in self.by_distance.values() for d in dist if d is not None}
        )
        header = ["phenomenon", "total"] + [f"d={d}" for d in distances]
        rows = [header]
        for phen, (c, t) in sorted(self.by_phenomenon.items()):
            row = [phen, f"{100 * c / t:5.1f} ({c}/{t})" if t else "-"]
            for d in distances:
                dc, dt = self.by_distance.get(phen, {}).get(d, (0, 0))
                row.append(f"{100 * dc / dt:5.1f} ({dc}/{dt})" if dt else "-")
            rows.append(row)
        rows.append(
            ["overall", f"{100 * self.accuracy:5.1f} ({self.correct}/{self.total})"]
            + ["" for _ in distances]
        )
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
        )


def contrastive_accuracy(
    instances: Sequence[ContrastiveInstance],
    scorer: Callable[[ContrastiveInstance, list[str]], float],
) -> ContrastiveReport:
    """Fraction of instances where the true group strictly outscores every
    contrastive one; ties count as failures."""
    correct = 0
    by_phenomenon: dict[str, list[int]] = {}
    by_distance: dict[str, dict[int | None, list[int]]] = {}
    for inst in instances:
        true_score = scorer(inst, inst.true_group)
        ok = all(true_score > scorer(inst, g) for g in inst.contrastive_groups)
        correct += ok
        pc = by_phenomenon.setdefault(inst.phenomenon, [0, 0])
        pc[0] += ok
        pc[1] += 1
        dc = by_distance.setdefault(inst.phenomenon, {}).setdefault(inst.distance, [0, 0])
        dc[0] += ok
        dc[1] += 1
    return ContrastiveReport(
        correct=correct,
        total=len(instances),
        by_phenomenon={p: (c, t) for p, (c, t) in by_phenomenon.items()},
        by_distance={
            p: {d: (c, t) for d, (c, t) in dist.items()} for p, dist in by_distance.items()
        },
    )


# -- change statistics ------------------------------------------------------------


def _normalized(sentence: str) -> str:
    return " ".join(sentence.split())


@dataclass
class ChangeStats:
    histogram: dict[int, int]
    unchanged_fraction: float
    bleu_vs_baseline: float
    bleu_vs_reference: float
    num_groups: int

    def to_dict(self) -> dict:
        return {
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "unchanged_fraction": self.unchanged_fraction,
            "bleu_vs_baseline": self.bleu_vs_baseline,
            "bleu_vs_reference": self.bleu_vs_reference,
            "num_groups": self.num_groups,
        }


def change_stats(
    baseline_groups: Sequence[Sequence[str]],
    repaired_groups: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    lowercase: bool = True,
) -> ChangeStats:
    """Per-group changed-sentence histogram plus BLEU against input and reference.

    A sentence counts as changed iff it differs as a whitespace-normalized
    string from the baseline sentence at the same position.
    """
    if not (len(baseline_groups) == len(repaired_groups) == len(references)):
        raise ValueError("baseline, repaired, and reference group lists must align")
    k = max((len(g) for g in baseline_groups), default=0)
    histogram = {i: 0 for i in range(k + 1)}
    for base, rep in zip(baseline_groups, repaired_groups):
        if len(base) != len(rep):
            raise ValueError("baseline and repaired groups must have equal sentence counts")
        changed = sum(
            _normalized(b) != _normalized(r) for b, r in zip(base, rep)
        )
        histogram[changed] = histogram.get(changed, 0) + 1
    n = len(baseline_groups)
    flat_base = [s for g in baseline_groups for s in g]
    flat_rep = [s for g in repaired_groups for s in g]
    flat_ref = [s for g in references for s in g]
    return ChangeStats(
        histogram=histogram,
        unchanged_fraction=histogram.get(0, 0) / n if n else 0.0,
        bleu_vs_baseline=bleu(flat_rep, flat_base, lowercase) if n else 0.0,
        bleu_vs_reference=bleu(flat_rep, flat_ref, lowercase) if n else 0.0,
        num_groups=n,
    )
