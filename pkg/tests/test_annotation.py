import json
import threading
import urllib.request

import pytest

from docrepair.annotation import (
    AnnotationServer,
    AnnotationStore,
    aggregate,
    build_tasks,
    load_tasks,
    resolve_choice,
    save_tasks,
)


def _mk_groups(n, tag):
    return [[f"{tag} {i} s{j}" for j in range(4)] for i in range(n)]


class TestBuildTasks:
    def test_full_copies_filtered(self):
        sources = _mk_groups(3, "src")
        base = _mk_groups(3, "base")
        rep = [list(g) for g in base]
        rep[1] = [s + " edited" for s in rep[1]]
        tasks = build_tasks(sources, base, rep, seed=0)
        assert len(tasks) == 1
        assert tasks[0].source == sources[1]

    def test_whitespace_equal_counts_as_copy(self):
        base = [["a b", "c d", "e f", "g h"]]
        rep = [["a  b", "c d", "e f", "g h"]]
        assert build_tasks([["s"] * 4], base, rep, seed=0) == []

    def test_origin_randomized_and_seeded(self):
        n = 200
        sources = _mk_groups(n, "src")
        base = _mk_groups(n, "base")
        rep = _mk_groups(n, "rep")
        tasks = build_tasks(sources, base, rep, seed=5)
        origins = [t.origin_a for t in tasks]
        assert 0.3 < origins.count("repaired") / n < 0.7
        again = build_tasks(sources, base, rep, seed=5)
        assert [t.origin_a for t in again] == origins
        # A/B payloads carry the right sides
        for t in tasks:
            if t.origin_a == "repaired":
                assert t.a[0].startswith("rep")
            else:
                assert t.a[0].startswith("base")

    def test_misaligned_rejected(self):
        with pytest.raises(ValueError):
            build_tasks([["s"]], [["b"]], [], seed=0)

    def test_roundtrip_file(self, tmp_path):
        tasks = build_tasks(_mk_groups(4, "s"), _mk_groups(4, "b"), _mk_groups(4, "r"), 1)
        path = tmp_path / "tasks.jsonl"
        save_tasks(tasks, path)
        loaded = load_tasks(path)
        assert [t.task_id for t in loaded] == [t.task_id for t in tasks]
        assert [t.origin_a for t in loaded] == [t.origin_a for t in tasks]


class TestResolution:
    def test_roundtrip_through_origin_map(self):
        for origin in ("baseline", "repaired"):
            assert resolve_choice("equal", origin) == "equal"
        assert resolve_choice("A", "repaired") == "repaired_better"
        assert resolve_choice("B", "repaired") == "baseline_better"
        assert resolve_choice("A", "baseline") == "baseline_better"
        assert resolve_choice("B", "baseline") == "repaired_better"


class TestAggregation:
    def test_published_benchmark_numbers(self, tmp_path):
        """700 judgments split 367/242/90 -> 52%/35%/13% and 73% preference."""
        # the published counts sum to 699 against a stated total of 700;
        # shares are computed over the total, which reproduces the table
        n = 700
        tasks = build_tasks(_mk_groups(n, "s"), _mk_groups(n, "b"), _mk_groups(n, "r"), 42)
        store = AnnotationStore(tasks, tmp_path / "judgments.jsonl")
        wanted = ["equal"] * 367 + ["repaired_better"] * 242 + ["baseline_better"] * 90
        for task, target in zip(tasks, wanted):
            if target == "equal":
                choice = "equal"
            elif target == "repaired_better":
                choice = "A" if task.origin_a == "repaired" else "B"
            else:
                choice = "A" if task.origin_a == "baseline" else "B"
            store.submit(task.task_id, "ann0", choice)
        stats = store.stats()
        assert stats["total_tasks"] == 700
        assert stats["judged"] == 699
        assert stats["equal"] == 367
        assert stats["repaired_better"] == 242
        assert stats["baseline_better"] == 90
        assert stats["percent_equal"] == 52
        assert stats["percent_repaired_better"] == 35
        assert stats["percent_baseline_better"] == 13
        assert stats["decided"] == 332
        assert stats["percent_preference_among_decided"] == 73

    def test_zero_judgments_no_division_error(self):
        stats = aggregate(10, [])
        assert stats["judged"] == 0
        assert stats["percent_equal"] == 0
        assert stats["percent_preference_among_decided"] == 0


class TestStore:
    def _tasks(self, n=5):
        return build_tasks(_mk_groups(n, "s"), _mk_groups(n, "b"), _mk_groups(n, "r"), 7)

    def test_duplicate_submission_rejected(self, tmp_path):
        tasks = self._tasks()
        store = AnnotationStore(tasks, tmp_path / "j.jsonl")
        store.submit(tasks[0].task_id, "a", "A")
        with pytest.raises(FileExistsError):
            store.submit(tasks[0].task_id, "b", "B")

    def test_unknown_task_rejected(self, tmp_path):
        store = AnnotationStore(self._tasks(), tmp_path / "j.jsonl")
        with pytest.raises(KeyError):
            store.submit("missing", "a", "A")

    def test_bad_choice_rejected(self, tmp_path):
        tasks = self._tasks()
        store = AnnotationStore(tasks, tmp_path / "j.jsonl")
        with pytest.raises(ValueError):
            store.submit(tasks[0].task_id, "a", "C")

    def test_restart_resumes_from_append_only_log(self, tmp_path):
        tasks = self._tasks()
        path = tmp_path / "j.jsonl"
        store = AnnotationStore(tasks, path)
        store.submit(tasks[0].task_id, "a", "equal")
        store.submit(tasks[1].task_id, "a", "A")
        resumed = AnnotationStore(tasks, path)
        assert resumed.stats()["judged"] == 2
        assert resumed.next_task().task_id == tasks[2].task_id
        with pytest.raises(FileExistsError):
            resumed.submit(tasks[0].task_id, "b", "B")

    def test_concurrent_submissions_all_recorded(self, tmp_path):
        tasks = self._tasks(32)
        store = AnnotationStore(tasks, tmp_path / "j.jsonl")

        def work(chunk):
            for t in chunk:
                store.submit(t.task_id, "ann", "A")

        threads = [
            threading.Thread(target=work, args=(tasks[i::4],)) for i in range(4)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert store.stats()["judged"] == 32
        lines = (tmp_path / "j.jsonl").read_text().strip().splitlines()
        assert len(lines) == 32


@pytest.fixture()
def server(tmp_path):
    tasks = build_tasks(_mk_groups(6, "s"), _mk_groups(6, "b"), _mk_groups(6, "r"), 3)
    store = AnnotationStore(tasks, tmp_path / "judgments.jsonl")
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>anno</body></html>")
    srv = AnnotationServer(store, port=0, static_dir=static)
    srv.start_background()
    host, port = srv.address
    yield f"http://{host}:{port}", store, tasks
    srv.shutdown()


def _get(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, json.loads(resp.read())


def _post(url, payload):
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


class TestHttpApi:
    def test_next_task_is_blind(self, server):
        base, _, _ = server
        status, payload = _get(f"{base}/api/tasks/next?annotator=a1")
        assert status == 200
        task = payload["task"]
        assert set(task) == {"task_id", "source", "a", "b"}
        assert "origin" not in json.dumps(payload)
        assert payload["progress"] == {"judged": 0, "total": 6}

    def test_judgment_flow_and_rejections(self, server):
        base, _, tasks = server
        tid = tasks[0].task_id
        status, _ = _post(f"{base}/api/tasks/{tid}/judgment", {"annotator": "a", "choice": "A"})
        assert status == 200
        status, _ = _post(f"{base}/api/tasks/{tid}/judgment", {"annotator": "a", "choice": "B"})
        assert status == 409
        status, _ = _post(f"{base}/api/tasks/none/judgment", {"annotator": "a", "choice": "A"})
        assert status == 404
        status, _ = _post(f"{base}/api/tasks/{tasks[1].task_id}/judgment", {"choice": "X"})
        assert status == 400
        status, stats = _get(f"{base}/api/stats")
        assert stats["judged"] == 1

    def test_drained_queue_returns_null_task(self, server):
        base, store, tasks = server
        for t in tasks:
            store.submit(t.task_id, "a", "equal")
        status, payload = _get(f"{base}/api/tasks/next?annotator=a")
        assert payload["task"] is None
        assert payload["progress"]["judged"] == 6

    def test_export_contains_resolution(self, server):
        base, store, tasks = server
        store.submit(tasks[0].task_id, "a", "A")
        status, payload = _get(f"{base}/api/export")
        assert status == 200
        assert payload["judgments"][0]["resolved"] in (
            "repaired_better", "baseline_better", "equal",
        )

    def test_static_serving(self, server):
        base, _, _ = server
        with urllib.request.urlopen(f"{base}/") as resp:
            assert resp.status == 200
            assert b"anno" in resp.read()
        with urllib.request.urlopen(f"{base}/index.html") as resp:
            assert resp.status == 200

    def test_unknown_path_404(self, server):
        base, _, _ = server
        try:
            urllib.request.urlopen(f"{base}/api/secret")
            raised = False
        except urllib.error.HTTPError as err:
            raised = err.code == 404
        assert raised
