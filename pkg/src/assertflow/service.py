"""HTTP facade over the store, pipeline, review queue, and synthesis loop.

The service is the single writer to its store. All responses are JSON.
Authentication is off by default; configuring a shared token requires the
X-Assertflow-Token header on every request.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from assertflow import artifacts as art
from assertflow import bridge
from assertflow.agents import AgentRuntime, AgentSpec
from assertflow.errors import (
    ArtifactParseError,
    AssertflowError,
    ConflictError,
    NotFoundError,
)
from assertflow.pipeline import PipelineConfig, run_pipeline
from assertflow.store import ArtifactStore, ReviewQueue
from assertflow.sva.lexer import tokenize
from assertflow.sva.parser import check_syntax


@dataclass
class ServiceConfig:
    token: str | None = None
    run_sync: bool = False  # execute pipeline runs inline (tests, fixtures)
    reviewer_default: str = "service"
    bridge_agents: dict[str, AgentSpec] = field(default_factory=dict)
    reverse_k: int = 3


def create_app(store: ArtifactStore, pipeline_config: PipelineConfig | None = None,
               runtime: AgentRuntime | None = None,
               config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    runtime = runtime or AgentRuntime()
    queue = ReviewQueue(store)
    app = FastAPI(title="assertflow", version="0.1.0")

    # candidates parked on the review queue, keyed by candidate id
    expert_candidates: dict[str, bridge.Candidate] = {}
    expert_tickets: dict[str, bridge.ExpertTicket] = {}

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if config.token is not None and \
                request.headers.get("x-assertflow-token") != config.token:
            return JSONResponse({"error": "missing or invalid token"}, status_code=401)
        return await call_next(request)

    def _error(status: int, message: str):
        raise HTTPException(status_code=status, detail=message)

    # -- runs ---------------------------------------------------------------

    @app.post("/runs", status_code=202)
    def post_run(spec_doc: dict = Body(...)):
        if pipeline_config is None:
            _error(503, "service started without a pipeline configuration")
        try:
            artifact = art.deserialize_artifact({**spec_doc, "id": spec_doc.get("id", "")})
        except ArtifactParseError as exc:
            _error(400, str(exc))
        if not isinstance(artifact, art.DesignSpec):
            _error(400, "body must be a design_spec document")
        spec = art.assign_id(artifact)
        report = art.validate_artifact(spec)
        if not report.ok:
            _error(422, f"spec failed validation: {report.violations}")
        from assertflow.pipeline import new_run_id

        run_id = new_run_id(spec.id, pipeline_config)
        run = art.PipelineRun(run_id=run_id, spec_ref=spec.id,
                              config_snapshot=pipeline_config.snapshot())
        store.save_run(run)
        store.put(spec)

        def execute():
            run_pipeline(spec, pipeline_config, store, runtime, run_id=run_id)

        if config.run_sync:
            execute()
        else:
            threading.Thread(target=execute, daemon=True).start()
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        try:
            return store.load_run(run_id).to_doc()
        except NotFoundError as exc:
            _error(404, str(exc))

    @app.get("/runs/{run_id}/artifacts/{stage}")
    def get_run_artifacts(run_id: str, stage: str):
        try:
            run = store.load_run(run_id)
        except NotFoundError as exc:
            _error(404, str(exc))
        if stage not in art.STAGES:
            _error(404, f"unknown stage {stage!r}")
        ids = run.stage_artifacts.get(stage, [])
        return {"stage": stage, "artifacts": [store.get_doc(a) for a in ids]}

    # -- review queue ---------------------------------------------------------

    @app.get("/review/queue")
    def review_queue(state: str | None = Query(default=None)):
        return {"items": [i.to_doc() for i in queue.list(state)]}

    @app.get("/review/{item_id}")
    def review_item(item_id: str):
        try:
            doc = queue.get(item_id).to_doc()
        except NotFoundError as exc:
            _error(404, str(exc))
        candidate = expert_candidates.get(doc["candidate_ref"])
        if candidate is not None:
            doc["candidate_status"] = candidate.status
        return doc

    @app.post("/review/{item_id}/verdict")
    def review_verdict(item_id: str, body: dict = Body(...)):
        try:
            item = queue.post_verdict(item_id, body.get("verdict", ""),
                                      body.get("reviewer", ""), body.get("reason"))
        except NotFoundError as exc:
            _error(404, str(exc))
        except ConflictError as exc:
            _error(409, str(exc))
        except ValueError as exc:
            _error(422, str(exc))
        doc = item.to_doc()
        candidate = expert_candidates.get(item.candidate_ref)
        ticket = expert_tickets.get(item.candidate_ref)
        if candidate is not None and ticket is not None:
            outcome = bridge.resolve_expert_ticket(ticket, candidate, queue)
            if outcome is not None:
                store_outcome(outcome)
            doc["candidate_status"] = candidate.status
        return doc

    def store_outcome(outcome: bridge.ValidationOutcome) -> None:
        (store.root / "outcomes").mkdir(exist_ok=True)
        path = store.root / "outcomes" / f"{outcome.outcome_id()}.json"
        from assertflow.ids import canonical_json

        path.write_text(canonical_json(outcome.to_doc()), encoding="utf-8")

    # -- synthesis ---------------------------------------------------------------

    @app.post("/bridge/synth")
    def bridge_synth(body: dict = Body(...)):
        task = body.get("task")
        if task not in bridge.TASKS:
            _error(422, f"unknown task {task!r}")
        generator = config.bridge_agents.get("generator")
        if generator is None:
            _error(503, "service started without bridge agents")
        try:
            artifact = art.deserialize_artifact(
                {**body["golden"], "id": body["golden"].get("id", "")})
            artifact = art.assign_id(artifact)
            goldens = bridge.ingest_golden(
                [artifact], body.get("reviewer", config.reviewer_default))
            golden = next(g for g in goldens if g.task == task)
        except (KeyError, StopIteration):
            _error(422, "golden artifact does not fit the requested task")
        except AssertflowError as exc:
            _error(422, str(exc))

        candidate_set = bridge.generate_candidates(golden, generator, runtime)
        outcomes = []
        items = []
        if task == "sva_to_checkpoint":
            reverse_agent = config.bridge_agents.get("reverse", generator)
            golden_sva = art.SvaAssertion.from_doc(golden.payload["sva"])
            k = int(body.get("k", config.reverse_k))
            for candidate in candidate_set.candidates:
                outcome = bridge.validate_reverse(
                    golden_sva, candidate, k, bridge.EquivCheckConfig(), reverse_agent,
                    runtime)
                bridge.apply_outcome(candidate, outcome)
                store_outcome(outcome)
                outcomes.append(outcome.to_doc())
        else:
            verifier = body.get("verifier", "expert_queue")
            for candidate in candidate_set.candidates:
                result = bridge.validate_direct(candidate, verifier, golden, queue)
                if isinstance(result, bridge.ExpertTicket):
                    expert_candidates[candidate.id] = candidate
                    expert_tickets[candidate.id] = result
                    items.append(result.item_id)
                else:
                    store_outcome(result)
                    outcomes.append(result.to_doc())
        return {
            "golden_id": golden.id,
            "candidates": [c.to_doc() for c in candidate_set.candidates],
            "outcomes": outcomes,
            "review_items": items,
            "warnings": list(candidate_set.warnings),
        }

    # -- datasets and metrics ---------------------------------------------------

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        try:
            jsonl_text, manifest = store.load_dataset(dataset_id)
        except NotFoundError as exc:
            _error(404, str(exc))
        return PlainTextResponse(jsonl_text, media_type="application/jsonl",
                                 headers={"x-dataset-manifest": manifest["dataset_id"]})

    @app.get("/metrics/{run_id}")
    def get_metrics(run_id: str):
        try:
            return store.load_report(run_id)
        except NotFoundError as exc:
            _error(404, str(exc))

    # -- lint (token stream feeds the review UI's highlighting) -----------------

    @app.post("/sva/lint")
    def lint(body: dict = Body(...)):
        text = body.get("text", "")
        report = check_syntax(text)
        tokens = []
        try:
            tokens = [{"kind": t.kind, "text": t.text, "line": t.line, "col": t.col}
                      for t in tokenize(text) if t.kind != "EOF"]
        except AssertflowError:
            pass
        return {
            "ok": report.ok,
            "diagnostics": [{"line": d.line, "column": d.column, "message": d.message,
                             "token": d.token} for d in report.diagnostics],
            "tokens": tokens,
        }

    return app
