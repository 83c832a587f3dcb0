"""Blind pairwise annotation service over HTTP.

Tasks pair a source group with two translations in seeded random order;
the served task view never reveals which side is which. Judgments are
immutable once submitted and are persisted as append-only JSON lines, so
a restarted server resumes from the store. Aggregation reports raw counts,
whole-percent shares, and the preference share among decided judgments.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlparse

import numpy as np

BASELINE, REPAIRED = "baseline", "repaired"
CHOICES = ("A", "B", "equal")


def _norm(sentence: str) -> str:
    return " ".join(sentence.split())


@dataclass
class AnnotationTask:
    task_id: str
    source: list[str]
    a: list[str]
    b: list[str]
    origin_a: str  # BASELINE or REPAIRED; never serialized into task views

    def view(self) -> dict:
        return {"task_id": self.task_id, "source": self.source, "a": self.a, "b": self.b}


@dataclass
class Judgment:
    task_id: str
    annotator: str
    choice: str
    resolved: str  # equal | repaired_better | baseline_better
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator": self.annotator,
            "choice": self.choice,
            "resolved": self.resolved,
            "timestamp": self.timestamp,
        }


def build_tasks(
    sources: list[list[str]],
    baseline_groups: list[list[str]],
    repaired_groups: list[list[str]],
    seed: int,
) -> list[AnnotationTask]:
    """Pre-filter full copies, then assign sides uniformly at random per task."""
    if not (len(sources) == len(baseline_groups) == len(repaired_groups)):
        raise ValueError("sources, baseline, and repaired group lists must align")
    rng = np.random.default_rng([seed, 0x417])
    tasks = []
    for src, base, rep in zip(sources, baseline_groups, repaired_groups):
        if [_norm(s) for s in base] == [_norm(s) for s in rep]:
            continue
        repaired_first = bool(rng.integers(2))
        a, b = (rep, base) if repaired_first else (base, rep)
        origin_a = REPAIRED if repaired_first else BASELINE
        tasks.append(
            AnnotationTask(f"t{len(tasks):05d}", list(src), list(a), list(b), origin_a)
        )
    return tasks


def save_tasks(tasks: list[AnnotationTask], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in tasks:
            record = {**t.view(), "origin_a": t.origin_a}
            f.write(json.dumps(record, sort_keys=True) + "\n")


def load_tasks(path) -> list[AnnotationTask]:
    tasks = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            r = json.loads(line)
            tasks.append(
                AnnotationTask(r["task_id"], r["source"], r["a"], r["b"], r["origin_a"])
            )
    return tasks


def resolve_choice(choice: str, origin_a: str) -> str:
    """Map a displayed-side choice back to the hidden model identity."""
    if choice == "equal":
        return "equal"
    chosen_origin = origin_a if choice == "A" else (BASELINE if origin_a == REPAIRED else REPAIRED)
    return "repaired_better" if chosen_origin == REPAIRED else "baseline_better"


def aggregate(total_tasks: int, judgments: list[Judgment]) -> dict:
    """Counts plus whole-percent shares of the full task set.

    Percentages are over the task total (the published benchmark table's
    "all" column is its denominator even though the stated counts sum one
    short of it); the preference share is over decided judgments only.
    """
    counts = {"equal": 0, "repaired_better": 0, "baseline_better": 0}
    for j in judgments:
        counts[j.resolved] += 1
    judged = len(judgments)
    decided = counts["repaired_better"] + counts["baseline_better"]

    def pct(x: int, denom: int) -> int:
        return round(100 * x / denom) if denom else 0

    return {
        "total_tasks": total_tasks,
        "judged": judged,
        "equal": counts["equal"],
        "repaired_better": counts["repaired_better"],
        "baseline_better": counts["baseline_better"],
        "percent_equal": pct(counts["equal"], total_tasks),
        "percent_repaired_better": pct(counts["repaired_better"], total_tasks),
        "percent_baseline_better": pct(counts["baseline_better"], total_tasks),
        "decided": decided,
        "percent_preference_among_decided": pct(counts["repaired_better"], decided),
    }


class AnnotationStore:
    """Single-writer task/judgment state with an append-only disk log."""

    def __init__(self, tasks: list[AnnotationTask], judgments_path):
        self.tasks = {t.task_id: t for t in tasks}
        self.order = [t.task_id for t in tasks]
        self.judgments_path = Path(judgments_path)
        self.judgments: dict[str, Judgment] = {}
        self._lock = threading.Lock()
        if self.judgments_path.exists():
            with open(self.judgments_path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    r = json.loads(line)
                    j = Judgment(**r)
                    self.judgments[j.task_id] = j

    def next_task(self) -> AnnotationTask | None:
        with self._lock:
            for task_id in self.order:
                if task_id not in self.judgments:
                    return self.tasks[task_id]
        return None

    def submit(self, task_id: str, annotator: str, choice: str) -> Judgment:
        if choice not in CHOICES:
            raise ValueError(f"choice must be one of {CHOICES}")
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise KeyError(task_id)
            if task_id in self.judgments:
                raise FileExistsError(task_id)  # duplicate submission
            judgment = Judgment(
                task_id=task_id,
                annotator=annotator,
                choice=choice,
                resolved=resolve_choice(choice, task.origin_a),
                timestamp=time.time(),
            )
            with open(self.judgments_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(judgment.to_dict(), sort_keys=True) + "\n")
                f.flush()
            self.judgments[task_id] = judgment
            return judgment

    def stats(self) -> dict:
        with self._lock:
            return aggregate(len(self.tasks), list(self.judgments.values()))

    def export(self) -> list[dict]:
        with self._lock:
            return [self.judgments[tid].to_dict() for tid in self.order if tid in self.judgments]


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
}


class _Handler(BaseHTTPRequestHandler):
    store: AnnotationStore
    static_dir: Path | None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload, status=200):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/tasks/next":
            task = self.store.next_task()
            stats = self.store.stats()
            self._send_json(
                {
                    "task": None if task is None else task.view(),
                    "progress": {"judged": stats["judged"], "total": stats["total_tasks"]},
                }
            )
        elif url.path == "/api/stats":
            self._send_json(self.store.stats())
        elif url.path == "/api/export":
            self._send_json({"judgments": self.store.export()})
        else:
            self._serve_static(url.path)

    def do_POST(self):
        match = re.fullmatch(r"/api/tasks/([^/]+)/judgment", urlparse(self.path).path)
        if not match:
            self._send_json({"error": "not found"}, 404)
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
            annotator = str(body.get("annotator", ""))
            choice = body["choice"]
        except (json.JSONDecodeError, KeyError):
            self._send_json({"error": "malformed judgment body"}, 400)
            return
        try:
            judgment = self.store.submit(match.group(1), annotator, choice)
        except ValueError as exc:
            self._send_json({"error": str(exc)}, 400)
            return
        except KeyError:
            self._send_json({"error": f"unknown task {match.group(1)}"}, 404)
            return
        except FileExistsError:
            self._send_json({"error": "task already judged"}, 409)
            return
        self._send_json({"ok": True, "task_id": judgment.task_id})

    def _serve_static(self, path: str):
        if self.static_dir is None:
            self._send_json({"error": "not found"}, 404)
            return
        name = "index.html" if path in ("", "/") else path.lstrip("/")
        target = (self.static_dir / name).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json({"error": "not found"}, 404)
            return
        body = target.read_bytes()
        self.send_response(200)
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class AnnotationServer:
    def __init__(
        self,
        store: AnnotationStore,
        host: str = "127.0.0.1",
        port: int = 0,
        static_dir=None,
    ):
        handler = type(
            "BoundHandler",
            (_Handler,),
            {"store": store, "static_dir": None if static_dir is None else Path(static_dir)},
        )
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.store = store

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    def serve_forever(self):
        self.httpd.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()
