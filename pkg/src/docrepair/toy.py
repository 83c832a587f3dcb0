"""Synthetic two-language corpus with cross-sentence agreement phenomena.

The target language marks a two-valued formality attribute on every
pronoun-bearing sentence (pronoun choice plus a verb suffix) and picks one
of two surface variants for each named entity. The source language drops
both marks, except that the first sentence of every document opens with a
greeting word that reveals the formality. A sentence-level translator
therefore has to guess the attribute per sentence, which makes independent
translations of a document internally inconsistent, while whole documents
in the target corpus are consistent by construction.

Sentence types:

* marked:   ``you V the N ADV [ADV]``      -> ``PRON V+suf das N' ADV' [ADV']``
* neutral:  ``the N is (very ADJ | ADJ ADV)`` -> same shape with target words
* entity:   ``E is very ADJ ADV``          -> ``E_variant ist sehr ADJ' ADV'``

Documents open with a marked sentence carrying ``hey``/``sir`` (source) and
``hallo``/``werter`` (target). A generated contrastive suite pairs each
consistent group with a version whose final sentence flips the attribute
(deixis analog) or the entity variant (lexical-cohesion analog), at
context distances 1-3.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import (
    Document,
    write_alignment,
    write_monolingual,
    write_timed,
)
from .evaluation import ContrastiveInstance, write_suite

GREET_SRC = ["hey", "sir"]  # index = formality value
GREET_TGT = ["hallo", "werter"]
PRON_TGT = ["du", "sie"]
SUFFIX = ["st", "en"]

VERBS_SRC = ["see", "take", "hold", "find", "like", "want"]
VERB_STEMS = ["seh", "nimm", "halt", "find", "mag", "woll"]
NOUNS_SRC = ["dog", "cat", "tree", "book", "lamp", "fish"]
NOUNS_TGT = ["hund", "katze", "baum", "buch", "lampe", "fisch"]
ADJS_SRC = ["red", "old", "small", "good"]
ADJS_TGT = ["rot", "alt", "klein", "gut"]
ADVS_SRC = ["now", "today", "again", "slowly"]
ADVS_TGT = ["jetzt", "heute", "wieder", "langsam"]
ENTITIES_SRC = ["zefir", "marell"]
ENTITY_VARIANTS = [["zefirus", "zefiro"], ["marella", "marellin"]]

MARKED, NEUTRAL, ENTITY = "marked", "neutral", "entity"


@dataclass
class ToySizes:
    train_docs: int = 420
    dev_docs: int = 24
    test_docs: int = 64
    mono_docs: int = 800
    suite_dev_per_cell: int = 10  # instances per (phenomenon, distance, attribute)
    suite_test_per_cell: int = 50
    min_doc_len: int = 4
    max_doc_len: int = 8
    eval_doc_len: int = 4  # dev/test documents partition exactly into groups


@dataclass
class SentencePlan:
    kind: str
    verb: int = 0
    noun: int = 0
    adj: int = 0
    adv: int = 0
    adv2: int = -1  # -1: absent
    entity: int = 0
    neutral_shape: int = 0  # 0: "very ADJ", 1: "ADJ ADV"
    first: bool = False


def _render(plan: SentencePlan, attr: int, variants: tuple[int, int]) -> tuple[str, str]:
    """Source/target surface strings for one planned sentence."""
    if plan.kind == MARKED:
        src = ["you", VERBS_SRC[plan.verb], "the", NOUNS_SRC[plan.noun], ADVS_SRC[plan.adv]]
        tgt = [
            PRON_TGT[attr],
            VERB_STEMS[plan.verb] + SUFFIX[attr],
            "das",
            NOUNS_TGT[plan.noun],
            ADVS_TGT[plan.adv],
        ]
        if plan.adv2 >= 0:
            src.append(ADVS_SRC[plan.adv2])
            tgt.append(ADVS_TGT[plan.adv2])
        if plan.first:
            src = [GREET_SRC[attr]] + src
            tgt = [GREET_TGT[attr]] + tgt
    elif plan.kind == NEUTRAL:
        if plan.neutral_shape == 0:
            src = ["the", NOUNS_SRC[plan.noun], "is", "very", ADJS_SRC[plan.adj]]
            tgt = ["das", NOUNS_TGT[plan.noun], "ist", "sehr", ADJS_TGT[plan.adj]]
        else:
            src = ["the", NOUNS_SRC[plan.noun], "is", ADJS_SRC[plan.adj], ADVS_SRC[plan.adv]]
            tgt = ["das", NOUNS_TGT[plan.noun], "ist", ADJS_TGT[plan.adj], ADVS_TGT[plan.adv]]
    elif plan.kind == ENTITY:
        variant = variants[plan.entity]
        src = [ENTITIES_SRC[plan.entity], "is", "very", ADJS_SRC[plan.adj], ADVS_SRC[plan.adv]]
        tgt = [
            ENTITY_VARIANTS[plan.entity][variant],
            "ist",
            "sehr",
            ADJS_TGT[plan.adj],
            ADVS_TGT[plan.adv],
        ]
    else:
        raise ValueError(f"unknown sentence kind {plan.kind}")
    return " ".join(src), " ".join(tgt)


def _random_plan(rng: np.random.Generator, kind: str, first: bool = False) -> SentencePlan:
    return SentencePlan(
        kind=kind,
        verb=int(rng.integers(len(VERBS_SRC))),
        noun=int(rng.integers(len(NOUNS_SRC))),
        adj=int(rng.integers(len(ADJS_SRC))),
        adv=int(rng.integers(len(ADVS_SRC))),
        adv2=int(rng.integers(len(ADVS_SRC))) if kind == MARKED and rng.random() < 0.4 else -1,
        entity=int(rng.integers(len(ENTITIES_SRC))),
        neutral_shape=int(rng.integers(2)),
        first=first,
    )


def _generate_document(
    rng: np.random.Generator, doc_id: str, length: int
) -> tuple[Document, Document]:
    """An internally consistent (source, target) document pair.

    One salient entity per document: every entity sentence mentions it, so
    repeated mentions (the lexical-cohesion signal) are frequent in groups.
    """
    attr = int(rng.integers(2))
    variants = (int(rng.integers(2)), int(rng.integers(2)))
    salient = int(rng.integers(len(ENTITIES_SRC)))
    src_sents: list[str] = []
    tgt_sents: list[str] = []
    for i in range(length):
        if i == 0:
            plan = _random_plan(rng, MARKED, first=True)
        else:
            kind = rng.choice([MARKED, NEUTRAL, ENTITY], p=[0.35, 0.2, 0.45])
            plan = _random_plan(rng, str(kind))
            if plan.kind == ENTITY:
                plan.entity = salient
        src, tgt = _render(plan, attr, variants)
        src_sents.append(src)
        tgt_sents.append(tgt)
    intervals = [(float(i), float(i + 1)) for i in range(length)]
    return (
        Document(doc_id, src_sents, list(intervals)),
        Document(doc_id, tgt_sents, list(intervals)),
    )


def _generate_split(
    rng: np.random.Generator, count: int, prefix: str, min_len: int, max_len: int
) -> tuple[list[Document], list[Document]]:
    src_docs, tgt_docs = [], []
    for i in range(count):
        length = int(rng.integers(min_len, max_len + 1))
        s, t = _generate_document(rng, f"{prefix}{i:05d}", length)
        src_docs.append(s)
        tgt_docs.append(t)
    return src_docs, tgt_docs


def _flip_formality(sentence: str) -> str:
    """Swap the formality value carried by a marked target sentence."""
    out = []
    for tok in sentence.split():
        if tok in PRON_TGT:
            out.append(PRON_TGT[1 - PRON_TGT.index(tok)])
        elif tok in GREET_TGT:
            out.append(GREET_TGT[1 - GREET_TGT.index(tok)])
        elif any(tok == stem + SUFFIX[a] for stem in VERB_STEMS for a in (0, 1)):
            for stem in VERB_STEMS:
                for a in (0, 1):
                    if tok == stem + SUFFIX[a]:
                        out.append(stem + SUFFIX[1 - a])
        else:
            out.append(tok)
    return " ".join(out)


def _flip_entity(sentence: str) -> str:
    out = []
    for tok in sentence.split():
        for variants in ENTITY_VARIANTS:
            if tok in variants:
                tok = variants[1 - variants.index(tok)]
                break
        out.append(tok)
    return " ".join(out)


def _deixis_instance(rng: np.random.Generator, distance: int, attr: int) -> ContrastiveInstance:
    """Group of 4; nearest marked context sentence sits ``distance`` before
    the final marked sentence; candidates differ only in the final one."""
    plans = []
    anchor = 3 - distance
    for i in range(3):
        if i == anchor:
            plans.append(_random_plan(rng, MARKED))
        else:
            kind = NEUTRAL if rng.random() < 0.5 else ENTITY
            plans.append(_random_plan(rng, kind))
    plans.append(_random_plan(rng, MARKED))
    variants = (int(rng.integers(2)), int(rng.integers(2)))
    rendered = [_render(p, attr, variants) for p in plans]
    src = [s for s, _ in rendered]
    tgt = [t for _, t in rendered]
    contrastive = tgt[:3] + [_flip_formality(tgt[3])]
    return ContrastiveInstance(
        source=src,
        context=tgt[:3],
        true_group=tgt,
        contrastive_groups=[contrastive],
        phenomenon="deixis",
        distance=distance,
    )


def _cohesion_instance(rng: np.random.Generator, distance: int, variant: int) -> ContrastiveInstance:
    """Same entity mentioned at positions 3-distance and 3; the contrastive
    group uses the other surface variant in the final mention."""
    entity = int(rng.integers(len(ENTITIES_SRC)))
    anchor = 3 - distance
    plans = []
    for i in range(3):
        if i == anchor:
            p = _random_plan(rng, ENTITY)
            p.entity = entity
            plans.append(p)
        else:
            plans.append(_random_plan(rng, NEUTRAL))
    final = _random_plan(rng, ENTITY)
    final.entity = entity
    plans.append(final)
    variants = [0, 0]
    variants[entity] = variant
    rendered = [_render(p, 0, tuple(variants)) for p in plans]
    src = [s for s, _ in rendered]
    tgt = [t for _, t in rendered]
    contrastive = tgt[:3] + [_flip_entity(tgt[3])]
    return ContrastiveInstance(
        source=src,
        context=tgt[:3],
        true_group=tgt,
        contrastive_groups=[contrastive],
        phenomenon="lex_cohesion",
        distance=distance,
    )


def _generate_suite(rng: np.random.Generator, per_cell: int) -> list[ContrastiveInstance]:
    """Balanced over (phenomenon, distance 1-3, attribute/variant value)."""
    instances = []
    for distance in (1, 2, 3):
        for value in (0, 1):
            for _ in range(per_cell):
                instances.append(_deixis_instance(rng, distance, value))
            for _ in range(per_cell):
                instances.append(_cohesion_instance(rng, distance, value))
    return instances


@dataclass
class ToyCorpus:
    root: Path

    def path(self, name: str) -> Path:
        return self.root / name


def make_toy_corpus(seed: int, sizes: ToySizes, out_dir) -> ToyCorpus:
    """Write the full corpus family; deterministic given (seed, sizes)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng([seed, 0xABCD])

    splits = {
        "train": _generate_split(rng, sizes.train_docs, "tr", sizes.min_doc_len, sizes.max_doc_len),
        "dev": _generate_split(rng, sizes.dev_docs, "dv", sizes.eval_doc_len, sizes.eval_doc_len),
        "test": _generate_split(rng, sizes.test_docs, "te", sizes.eval_doc_len, sizes.eval_doc_len),
    }
    for name, (src_docs, tgt_docs) in splits.items():
        write_timed(src_docs, out / f"{name}.src.tsv")
        write_timed(tgt_docs, out / f"{name}.tgt.tsv")
        total = sum(len(d) for d in src_docs)
        write_alignment([(i, i) for i in range(total)], out / f"{name}.align.tsv")

    _, mono_docs = _generate_split(rng, sizes.mono_docs, "mo", sizes.min_doc_len, sizes.max_doc_len)
    write_monolingual(mono_docs, out / "mono.tgt.txt")

    write_suite(_generate_suite(rng, sizes.suite_dev_per_cell), out / "contrastive.dev.jsonl")
    write_suite(_generate_suite(rng, sizes.suite_test_per_cell), out / "contrastive.test.jsonl")
    return ToyCorpus(root=out)
