#!/usr/bin/env python3
"""Dump canonical HTTP responses from the real service into the frontend's
test fixtures, so the UI tests exercise the genuine wire shapes."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from assertflow.agents import AgentRuntime
from assertflow.config import load_bridge_agents, load_pipeline_config
from assertflow.service import ServiceConfig, create_app
from assertflow.store import ArtifactStore

ROOT = Path(__file__).resolve().parent.parent
TOY = ROOT / "tests" / "fixtures" / "toy"
OUT = ROOT / "frontend" / "test" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = ArtifactStore(tmp)
        runtime = AgentRuntime(base_dir=TOY)
        app = create_app(
            store, load_pipeline_config(TOY / "pipeline_config.json"), runtime,
            ServiceConfig(run_sync=True,
                          bridge_agents=load_bridge_agents(TOY / "bridge_config.json")))
        client = TestClient(app)

        spec_doc = json.loads((TOY / "design_spec.json").read_text())
        run_id = client.post("/runs", json=spec_doc).json()["run_id"]
        dump("run.json", client.get(f"/runs/{run_id}").json())
        dump("run_artifacts_svas.json",
             client.get(f"/runs/{run_id}/artifacts/svas").json())

        plan_doc = {
            "kind": "verification_plan", "schema_version": 1, "id": "",
            "spec_ref": "design_spec-0000000000000000",
            "sections": [{"title": "Handshake", "function_summary": "hs",
                          "signal_relations": [], "verification_requirements": []}],
            "signal_table": [{"name": "req", "direction": "in", "width": 1,
                              "description": ""}],
        }
        synth = client.post("/bridge/synth", json={
            "task": "plan_to_features", "golden": plan_doc,
            "verifier": "expert_queue", "reviewer": "fixture"}).json()
        dump("bridge_synth.json", synth)
        item_id = synth["review_items"][0]
        dump("review_queue_open.json",
             client.get("/review/queue", params={"state": "open"}).json())
        dump("review_item_open.json", client.get(f"/review/{item_id}").json())
        decided = client.post(f"/review/{item_id}/verdict", json={
            "verdict": "approve", "reviewer": "fixture-reviewer"}).json()
        dump("review_item_decided.json", decided)
        conflict = client.post(f"/review/{item_id}/verdict", json={
            "verdict": "reject", "reviewer": "other"})
        dump("verdict_conflict.json",
             {"status": conflict.status_code, "body": conflict.json()})

        dump("lint_response.json", client.post("/sva/lint", json={
            "text": "assert property (@(posedge clk) req && !full |-> ##1 ack);"}).json())
    print(f"wrote fixtures under {OUT}")


def dump(name: str, doc) -> None:
    (OUT / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"  {name}")


if __name__ == "__main__":
    main()
