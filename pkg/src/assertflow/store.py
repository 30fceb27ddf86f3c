"""File-backed content-addressed artifact store and expert-review queue.

Layout under the store root:

    objects/<id>.json    immutable artifact documents, named by content id
    write_log.jsonl      append-only record of every put (crash recovery)
    index.json           id -> (kind, path, digest); rebuildable from the log
    runs/<run_id>.json   mutable run manifests (atomic rewrite)
    reviews/events.jsonl append-only review events; state is derived
    datasets/            dataset files and split manifests
    reports/<run>.json   stored evaluation reports

Writes go through temp-file + rename, so a crash never leaves a partial
object visible; reindex() recovers the index from the write log.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from assertflow.errors import ConflictError, CorruptArtifactError, NotFoundError
from assertflow.ids import canonical_json, content_id, digest_hex
from assertflow.artifacts import PipelineRun, deserialize_artifact

ENV_STORE_ROOT = "ASSERTFLOW_STORE"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ArtifactStore:
    """Idempotent put / verified get over canonical artifact documents."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        for sub in ("objects", "runs", "reviews", "datasets", "reports"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"
        self._log_path = self.root / "write_log.jsonl"
        self._index: dict[str, dict] = {}
        if self._index_path.exists():
            self._index = json.loads(self._index_path.read_text())
        elif self._log_path.exists():
            self.reindex()

    # -- content-addressed objects ------------------------------------------

    def put(self, artifact) -> str:
        doc = artifact.to_doc()
        expected = content_id(artifact.kind, doc)
        if doc.get("id") and doc["id"] != expected:
            raise ValueError(
                f"artifact id {doc['id']!r} does not match its content ({expected})")
        doc["id"] = expected
        if expected in self._index and (self.root / self._index[expected]["path"]).exists():
            return expected  # idempotent: identical content, one physical entry
        text = canonical_json(doc)
        rel = f"objects/{expected}.json"
        _atomic_write(self.root / rel, text)
        entry = {"id": expected, "kind": artifact.kind, "path": rel,
                 "digest": digest_hex(text), "ts": _now()}
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json({"op": "put", **entry}) + "\n")
        self._index[expected] = entry
        self._flush_index()
        return expected

    def get(self, artifact_id: str):
        entry = self._index.get(artifact_id)
        if entry is None:
            raise NotFoundError(f"artifact {artifact_id!r} not found")
        path = self.root / entry["path"]
        if not path.exists():
            raise NotFoundError(f"artifact {artifact_id!r} missing from disk")
        text = path.read_text(encoding="utf-8")
        doc = json.loads(text)
        recomputed = content_id(doc["kind"], doc)
        if recomputed != artifact_id:
            raise CorruptArtifactError(
                f"stored bytes for {artifact_id!r} hash to {recomputed!r}")
        return deserialize_artifact(doc)

    def get_doc(self, artifact_id: str) -> dict:
        return self.get(artifact_id).to_doc()

    def has(self, artifact_id: str) -> bool:
        return artifact_id in self._index

    def ids_of_kind(self, kind: str) -> list[str]:
        return sorted(i for i, e in self._index.items() if e["kind"] == kind)

    def reindex(self) -> int:
        """Rebuild the index from the append-only write log."""
        index: dict[str, dict] = {}
        if self._log_path.exists():
            with self._log_path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if record.get("op") == "put" and \
                            (self.root / record["path"]).exists():
                        index[record["id"]] = {k: record[k] for k in
                                               ("id", "kind", "path", "digest", "ts")}
        self._index = index
        self._flush_index()
        return len(index)

    def _flush_index(self) -> None:
        _atomic_write(self._index_path, json.dumps(self._index, indent=1, sort_keys=True))

    # -- run manifests --------------------------------------------------------

    def save_run(self, run: PipelineRun) -> None:
        _atomic_write(self.root / "runs" / f"{run.run_id}.json",
                      json.dumps(run.to_doc(), indent=1, sort_keys=True))

    def load_run(self, run_id: str) -> PipelineRun:
        path = self.root / "runs" / f"{run_id}.json"
        if not path.exists():
            raise NotFoundError(f"run {run_id!r} not found")
        return PipelineRun.from_doc(json.loads(path.read_text()))

    def has_run(self, run_id: str) -> bool:
        return (self.root / "runs" / f"{run_id}.json").exists()

    def list_runs(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "runs").glob("*.json"))

    # -- datasets and reports ---------------------------------------------------

    def save_dataset(self, dataset_id: str, jsonl_text: str, manifest: dict) -> Path:
        path = self.root / "datasets" / f"{dataset_id}.jsonl"
        _atomic_write(path, jsonl_text)
        _atomic_write(self.root / "datasets" / f"{dataset_id}.manifest.json",
                      json.dumps(manifest, indent=1, sort_keys=True))
        return path

    def load_dataset(self, dataset_id: str) -> tuple[str, dict]:
        path = self.root / "datasets" / f"{dataset_id}.jsonl"
        manifest = self.root / "datasets" / f"{dataset_id}.manifest.json"
        if not path.exists():
            raise NotFoundError(f"dataset {dataset_id!r} not found")
        return path.read_text(encoding="utf-8"), json.loads(manifest.read_text())

    def list_datasets(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "datasets").glob("*.jsonl"))

    def save_report(self, run_id: str, report_doc: dict) -> None:
        _atomic_write(self.root / "reports" / f"{run_id}.json",
                      json.dumps(report_doc, indent=1, sort_keys=True))

    def load_report(self, run_id: str) -> dict:
        path = self.root / "reports" / f"{run_id}.json"
        if not path.exists():
            raise NotFoundError(f"no stored report for run {run_id!r}")
        return json.loads(path.read_text())


@dataclass(frozen=True)
class ReviewItem:
    item_id: str
    candidate_ref: str
    task: str
    payload: dict  # candidate payload snapshot
    golden: dict  # golden payload snapshot
    state: str  # open | decided
    verdict: str | None = None  # approve | reject
    reviewer: str | None = None
    reason: str | None = None
    decided_at: str | None = None

    def to_doc(self) -> dict:
        return {
            "item_id": self.item_id, "candidate_ref": self.candidate_ref,
            "task": self.task, "payload": self.payload, "golden": self.golden,
            "state": self.state, "verdict": self.verdict, "reviewer": self.reviewer,
            "reason": self.reason, "decided_at": self.decided_at,
        }


class ReviewQueue:
    """Append-only event log; open -> decided exactly once, first verdict wins."""

    def __init__(self, store: ArtifactStore) -> None:
        self._path = store.root / "reviews" / "events.jsonl"
        self._items: dict[str, ReviewItem] = {}
        self._replay()

    def _replay(self) -> None:
        if not self._path.exists():
            return
        with self._path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        if event["event"] == "item_added":
            item = ReviewItem(
                item_id=event["item_id"], candidate_ref=event["candidate_ref"],
                task=event["task"], payload=event["payload"], golden=event["golden"],
                state="open")
            self._items.setdefault(item.item_id, item)
        elif event["event"] == "verdict_posted":
            current = self._items.get(event["item_id"])
            if current is not None and current.state == "open":
                self._items[event["item_id"]] = ReviewItem(
                    item_id=current.item_id, candidate_ref=current.candidate_ref,
                    task=current.task, payload=current.payload, golden=current.golden,
                    state="decided", verdict=event["verdict"],
                    reviewer=event["reviewer"], reason=event.get("reason"),
                    decided_at=event["ts"])

    def _append(self, event: dict) -> None:
        with self._path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(event) + "\n")

    def add_item(self, candidate_ref: str, task: str, payload: dict, golden: dict) -> str:
        item_id = content_id("review", {"candidate_ref": candidate_ref, "task": task,
                                        "payload": payload})
        if item_id in self._items:
            return item_id
        event = {"event": "item_added", "item_id": item_id, "candidate_ref": candidate_ref,
                 "task": task, "payload": payload, "golden": golden, "ts": _now()}
        self._append(event)
        self._apply(event)
        return item_id

    def get(self, item_id: str) -> ReviewItem:
        item = self._items.get(item_id)
        if item is None:
            raise NotFoundError(f"review item {item_id!r} not found")
        return item

    def list(self, state: str | None = None) -> list[ReviewItem]:
        items = sorted(self._items.values(), key=lambda i: i.item_id)
        if state is not None:
            items = [i for i in items if i.state == state]
        return items

    def post_verdict(self, item_id: str, verdict: str, reviewer: str,
                     reason: str | None = None) -> ReviewItem:
        item = self.get(item_id)
        if item.state == "decided":
            raise ConflictError(
                f"review item {item_id!r} already decided ({item.verdict} "
                f"by {item.reviewer}); first verdict wins")
        if verdict not in ("approve", "reject"):
            raise ValueError(f"verdict must be approve or reject, got {verdict!r}")
        if not reviewer:
            raise ValueError("reviewer is required")
        event = {"event": "verdict_posted", "item_id": item_id, "verdict": verdict,
                 "reviewer": reviewer, "reason": reason, "ts": _now()}
        self._append(event)
        self._apply(event)
        return self.get(item_id)


def open_store(root: str | Path | None = None) -> ArtifactStore:
    """Open the store at an explicit root, $ASSERTFLOW_STORE, or ./.assertflow."""
    if root is None:
        root = os.environ.get(ENV_STORE_ROOT, ".assertflow")
    return ArtifactStore(root)
