#!/usr/bin/env python3
"""Serve the real annotation backend with the 700-task benchmark fixture.

Prints one JSON line to stdout:
    {"port": ..., "choices": [{"task_id": ..., "choice": ...}, ...]}

The choices are precomputed from the hidden origin map so that submitting
them yields resolved counts 367 equal / 242 repaired-better / 90
baseline-better (the backend-only acceptance fixture). Runs until killed.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from docrepair.annotation import AnnotationServer, AnnotationStore, build_tasks


def main() -> int:
    n = 700
    sources = [[f"source {i} sentence {j}" for j in range(4)] for i in range(n)]
    base = [[f"baseline {i} sentence {j}" for j in range(4)] for i in range(n)]
    rep = [[f"repaired {i} sentence {j}" for j in range(4)] for i in range(n)]
    tasks = build_tasks(sources, base, rep, seed=42)
    wanted = ["equal"] * 367 + ["repaired_better"] * 242 + ["baseline_better"] * 90
    choices = []
    for task, target in zip(tasks, wanted):
        if target == "equal":
            choice = "equal"
        elif target == "repaired_better":
            choice = "A" if task.origin_a == "repaired" else "B"
        else:
            choice = "A" if task.origin_a == "baseline" else "B"
        choices.append({"task_id": task.task_id, "choice": choice})

    workdir = Path(tempfile.mkdtemp(prefix="anno-fixture-"))
    store = AnnotationStore(tasks, workdir / "judgments.jsonl")
    server = AnnotationServer(store, host="127.0.0.1", port=0)
    _, port = server.address
    print(json.dumps({"port": port, "choices": choices}), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
