#!/usr/bin/env python3
"""Convert externally published consistency test sets into the suite schema.

The published English-Russian sets ship as JSON: a list of examples, each
with a multi-sentence source, one correct target group, and one or more
minimally different wrong target groups. Field names vary a little across
releases, so this accepts the common aliases:

    source sentences:  "src" | "source"
    correct group:     "dst" | "true" | "correct"
    wrong groups:      "wrong_dst" | "contrastive" | "wrong" (list or single)
    distance:          "distance" | "dist" (optional)

Sentence lists may be real JSON lists or single strings joined by the
" _eos " marker those releases use. The phenomenon label comes from
--phenomenon (one per file in the published sets). The test data itself is
not bundled here; point this at your local copy.

Usage:
    python3 scripts/convert_suite.py deixis_test.json \
        --phenomenon deixis --out deixis.jsonl
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from docrepair.evaluation import PHENOMENA, ContrastiveInstance, write_suite


def _sentences(value) -> list[str]:
    if isinstance(value, list):
        return [str(s).strip() for s in value]
    return [part.strip() for part in str(value).split("_eos")]


def _pick(record: dict, *names):
    for name in names:
        if name in record:
            return record[name]
    raise KeyError(f"record has none of {names}: keys are {sorted(record)}")


def convert(records: list[dict], phenomenon: str) -> list[ContrastiveInstance]:
    instances = []
    for record in records:
        source = _sentences(_pick(record, "src", "source"))
        true_group = _sentences(_pick(record, "dst", "true", "correct"))
        wrong = _pick(record, "wrong_dst", "contrastive", "wrong")
        if isinstance(wrong, (str,)) or (
            isinstance(wrong, list) and wrong and isinstance(wrong[0], str)
            and "_eos" not in wrong[0] and len(_sentences(wrong[0])) == 1
        ):
            wrong_groups = [_sentences(wrong)]
        elif isinstance(wrong, list) and wrong and isinstance(wrong[0], list):
            wrong_groups = [_sentences(w) for w in wrong]
        else:
            wrong_groups = [_sentences(w) for w in (wrong if isinstance(wrong, list) else [wrong])]
        distance = record.get("distance", record.get("dist"))
        instances.append(
            ContrastiveInstance(
                source=source,
                context=true_group[:-1],
                true_group=true_group,
                contrastive_groups=wrong_groups,
                phenomenon=phenomenon,
                distance=None if distance is None else int(distance),
            )
        )
    return instances


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="published test-set JSON file")
    parser.add_argument("--phenomenon", required=True, choices=PHENOMENA)
    parser.add_argument("--out", required=True, help="output suite (.jsonl)")
    args = parser.parse_args()
    with open(args.input, encoding="utf-8") as f:
        records = json.load(f)
    if not isinstance(records, list):
        raise SystemExit("expected a JSON list of examples")
    instances = convert(records, args.phenomenon)
    write_suite(instances, args.out)
    print(f"wrote {len(instances)} instances to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
