from __future__ import annotations

import json

import pytest

from assertflow import artifacts as art
from assertflow.errors import ConflictError, CorruptArtifactError, NotFoundError
from assertflow.store import ArtifactStore, ReviewQueue


def make_spec(title="widget") -> art.DesignSpec:
    return art.assign_id(art.DesignSpec(
        id="", title=title, body="body text",
        port_table=(art.PortDecl("clk", "in", 1),)))


class TestArtifactStore:
    def test_put_is_idempotent(self, store):
        spec = make_spec()
        first = store.put(spec)
        second = store.put(spec)
        assert first == second
        assert len(list((store.root / "objects").glob("*.json"))) == 1

    def test_get_round_trips_bytes(self, store):
        spec = make_spec()
        artifact_id = store.put(spec)
        assert store.get(artifact_id) == spec

    def test_get_unknown_id(self, store):
        with pytest.raises(NotFoundError):
            store.get("design_spec-ffffffffffffffff")

    def test_tampered_file_raises_corruption(self, store):
        spec = make_spec()
        artifact_id = store.put(spec)
        path = store.root / "objects" / f"{artifact_id}.json"
        doc = json.loads(path.read_text())
        doc["title"] = "tampered"
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptArtifactError):
            store.get(artifact_id)

    def test_reindex_recovers_from_write_log(self, store):
        ids = [store.put(make_spec(f"t{i}")) for i in range(3)]
        (store.root / "index.json").unlink()
        recovered = ArtifactStore(store.root)
        assert sorted(recovered.ids_of_kind("design_spec")) == sorted(ids)
        for artifact_id in ids:
            recovered.get(artifact_id)

    def test_run_persistence(self, store):
        run = art.PipelineRun(run_id="r1", spec_ref="s")
        run.transition("plan", "running")
        store.save_run(run)
        loaded = store.load_run("r1")
        assert loaded.stage_status["plan"] == "running"
        assert store.list_runs() == ["r1"]


class TestReviewQueue:
    def _queue_with_item(self, store):
        queue = ReviewQueue(store)
        item_id = queue.add_item("cand-1", "plan_to_features",
                                 {"feature_id": "F1"}, {"plan": {}})
        return queue, item_id

    def test_open_then_decided(self, store):
        queue, item_id = self._queue_with_item(store)
        assert queue.get(item_id).state == "open"
        decided = queue.post_verdict(item_id, "approve", "reviewer-a")
        assert decided.state == "decided"
        assert decided.verdict == "approve"

    def test_second_verdict_conflicts_first_wins(self, store):
        queue, item_id = self._queue_with_item(store)
        queue.post_verdict(item_id, "approve", "reviewer-a")
        with pytest.raises(ConflictError):
            queue.post_verdict(item_id, "reject", "reviewer-b")
        assert queue.get(item_id).verdict == "approve"

    def test_state_filter(self, store):
        queue, item_id = self._queue_with_item(store)
        queue.add_item("cand-2", "plan_to_features", {"feature_id": "F2"}, {})
        queue.post_verdict(item_id, "reject", "reviewer-a", reason="wrong section")
        assert {i.item_id for i in queue.list("open")} != set()
        assert all(i.state == "open" for i in queue.list("open"))
        assert all(i.state == "decided" for i in queue.list("decided"))

    def test_decisions_survive_restart(self, store):
        queue, item_id = self._queue_with_item(store)
        queue.post_verdict(item_id, "approve", "reviewer-a")
        reopened = ReviewQueue(store)
        assert reopened.get(item_id).state == "decided"
        assert reopened.get(item_id).reviewer == "reviewer-a"

    def test_reviewer_required(self, store):
        queue, item_id = self._queue_with_item(store)
        with pytest.raises(ValueError):
            queue.post_verdict(item_id, "approve", "")
