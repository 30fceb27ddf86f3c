"""The four-stage generation workflow: plan -> features -> checkpoints -> svas.

One agent call per (stage, input artifact), list-valued outputs. LLM
responses are free text; parse_stage_output pulls the first well-formed
JSON document block out (tolerating prose and code fences) and schema
checks it. A parse failure triggers a repair re-prompt with the
diagnostic appended, up to the configured attempt cap.

Runs are resumable: the manifest records per-stage status and artifact
ids, and a re-invocation with the same run id skips stages already done
without any agent calls.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

from assertflow import artifacts as art
from assertflow.agents import AgentRuntime, AgentSpec, PromptText, render_prompt, retrieve
from assertflow.errors import AssertflowError, StageFailureError
from assertflow.ids import canonical_json, content_id
from assertflow.metrics import pass_rate
from assertflow.store import ArtifactStore
from assertflow.sva import ast as sva_ast
from assertflow.sva.parser import SvaParseError, parse_assertion

STAGES = art.STAGES

DEFAULT_FANOUT = {"plan": 1, "features": 64, "checkpoints": 16, "svas": 4}

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class StageConfig:
    stage: str
    agent: str  # AgentSpec name
    max_repair_attempts: int = 2
    fanout_limit: int | None = None  # None: stage default

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.fanout_limit is not None and self.fanout_limit < 1:
            raise ValueError("fanout_limit must be >= 1")

    @property
    def effective_fanout(self) -> int:
        return self.fanout_limit if self.fanout_limit is not None \
            else DEFAULT_FANOUT[self.stage]


@dataclass
class PipelineConfig:
    agents: dict[str, AgentSpec]
    stages: dict[str, StageConfig]
    context_store: object | None = None  # optional retrieval store shared by agents

    def snapshot(self) -> dict:
        return {
            "stages": {s: {"agent": c.agent,
                           "max_repair_attempts": c.max_repair_attempts,
                           "fanout_limit": c.effective_fanout}
                       for s, c in self.stages.items()},
            "agents": {name: {"backend": spec.backend.kind,
                              "temperature": spec.temperature,
                              "max_retries": spec.max_retries}
                       for name, spec in self.agents.items()},
        }


@dataclass(frozen=True)
class ParseFailure:
    message: str
    position: int | None = None  # offset of the failed block in the raw text
    warnings: tuple[str, ...] = ()

    def diagnostic(self) -> str:
        at = f" (at offset {self.position})" if self.position is not None else ""
        return f"{self.message}{at}"


_STAGE_SCHEMAS = {
    "plan": ("sections", "signal_table"),
    "features": ("features",),
    "checkpoints": ("checkpoints",),
    "svas": ("svas",),
}


def parse_stage_output(stage: str, raw_text: str, drop_invalid_items: bool = False):
    """Extract and schema-check the stage document from an LLM response.

    Returns (payloads, warnings) where payloads is a list of plain dicts
    in stage shape, or a ParseFailure carrying the diagnostic for the
    repair prompt. Never raises on bad input.

    With drop_invalid_items, a response whose overall structure is sound
    keeps its good items and drops schema-invalid ones with a warning
    each (the synthesis loop's behavior); otherwise any invalid item
    fails the whole response so the repair prompt can fix it.
    """
    blocks = _candidate_blocks(raw_text)
    if not blocks:
        return ParseFailure("no document block found in the response")
    warnings: list[str] = []
    doc = None
    position = None
    for offset, block in blocks:
        try:
            doc = json.loads(block)
            position = offset
            break
        except json.JSONDecodeError as exc:
            warnings.append(f"skipped malformed block at offset {offset}: {exc.msg}")
    if doc is None:
        return ParseFailure("no parseable document block in the response",
                            warnings=tuple(warnings))
    problem = _structure_problem(stage, doc)
    if problem:
        return ParseFailure(f"document does not match the {stage} stage schema: {problem}",
                            position=position, warnings=tuple(warnings))
    payloads = _stage_payloads(stage, doc)
    bad = {i: problem for i, item in enumerate(payloads)
           if (problem := _item_problem(stage, i, item))}
    if bad and not drop_invalid_items:
        return ParseFailure(f"document does not match the {stage} stage schema: "
                            f"{next(iter(bad.values()))}",
                            position=position, warnings=tuple(warnings))
    if bad:
        warnings.extend(f"dropped schema-invalid item: {p}" for p in bad.values())
        payloads = [item for i, item in enumerate(payloads) if i not in bad]
    return payloads, tuple(warnings)


def _candidate_blocks(raw_text: str) -> list[tuple[int, str]]:
    blocks = [(m.start(1), m.group(1)) for m in _FENCE.finditer(raw_text)]
    if blocks:
        return blocks
    # fall back to brace-matched spans in unfenced text
    spans = []
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(raw_text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    spans.append((start, raw_text[start:i + 1]))
                    start = None
    return spans


def _structure_problem(stage: str, doc) -> str | None:
    if not isinstance(doc, dict):
        return "top level is not an object"
    for key in _STAGE_SCHEMAS[stage]:
        if key not in doc:
            return f"missing key {key!r}"
        if not isinstance(doc[key], list):
            return f"{key!r} must be a list"
    if stage == "plan":
        for i, section in enumerate(doc["sections"]):
            for key in ("title", "function_summary"):
                if not isinstance(section.get(key), str) or not section[key].strip():
                    return f"sections[{i}].{key} missing or empty"
    return None


def _item_problem(stage: str, index: int, item) -> str | None:
    if stage in ("features", "checkpoints") and not isinstance(item, dict):
        return f"{stage}[{index}] must be an object"
    if stage == "features":
        for key in ("feature_id", "title", "description", "source_section"):
            if not isinstance(item.get(key), str) or not item[key].strip():
                return f"features[{index}].{key} missing or empty"
    if stage == "checkpoints":
        for key in ("description", "trigger", "expected", "timing"):
            if not isinstance(item.get(key), str) or not item[key].strip():
                return f"checkpoints[{index}].{key} missing or empty"
        if not isinstance(item.get("signals"), list) or not item["signals"]:
            return f"checkpoints[{index}].signals missing or empty"
    if stage == "svas":
        if not isinstance(item, str) or not item.strip():
            return f"svas[{index}] must be a non-empty assertion string"
    return None


def _stage_payloads(stage: str, doc: dict) -> list:
    if stage == "plan":
        return [{"sections": doc["sections"], "signal_table": doc["signal_table"]}]
    if stage == "features":
        return list(doc["features"])
    if stage == "checkpoints":
        return list(doc["checkpoints"])
    return list(doc["svas"])


# --------------------------------------------------------------------------
# Stage execution

def stage_template(stage: str) -> str:
    return resources.files("assertflow.data.prompts").joinpath(f"{stage}.txt").read_text()


def slugify(title: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", title.lower()).strip("_") or "design"


@dataclass
class StageContext:
    """Everything run_stage needs beyond the input artifact itself."""

    runtime: AgentRuntime
    agent: AgentSpec
    bindings: dict
    scenario_key: str
    lineage: tuple[str, ...] = ()  # ancestor ids for produced artifacts, nearest first
    plan_signals: tuple[str, ...] = ()
    warnings_sink: list[str] | None = None
    context_store: object | None = None
    run_id: str | None = None


def _log_response(store: ArtifactStore, context: StageContext, stage: str,
                  response) -> None:
    # raw-response provenance: every response that fed an artifact stays
    # on disk, keyed by run, with the digest of the prompt that caused it
    if context.run_id is None:
        return
    path = store.root / "responses" / f"{context.run_id}.jsonl"
    path.parent.mkdir(exist_ok=True)
    record = {"stage": stage, "scenario_key": context.scenario_key,
              "agent": response.agent_name, "prompt_digest": response.prompt_digest,
              "attempt_index": response.attempt_index, "raw_text": response.raw_text}
    with path.open("a", encoding="utf-8") as fh:
        fh.write(canonical_json(record) + "\n")


def run_stage(stage_config: StageConfig, input_artifact, store: ArtifactStore,
              context: StageContext) -> list:
    """Invoke the stage agent on one input artifact and persist the outputs.

    Outputs are schema-validated and lineage-linked. For the svas stage,
    unparseable assertions are retained with syntax_ok=False; they count
    against the syntax pass rate rather than being silently dropped.
    """
    expected_kind = {"plan": art.DesignSpec, "features": art.VerificationPlan,
                     "checkpoints": art.Feature, "svas": art.Checkpoint}[stage_config.stage]
    if not isinstance(input_artifact, expected_kind):
        raise AssertflowError(
            f"stage {stage_config.stage!r} expects a {expected_kind.__name__} input, "
            f"got {type(input_artifact).__name__}")
    if not isinstance(input_artifact, art.Feature):
        report = art.validate_artifact(input_artifact, store)
        if not report.ok:
            raise AssertflowError(
                f"stage input failed validation: {report.violations[0][1]}")

    retrieved = ()
    if context.agent.retrieval is not None and context.context_store is not None:
        retrieved = retrieve(context.context_store, context.bindings.get("spec_body", ""),
                             context.agent.retrieval.top_k)
    base_prompt = render_prompt(context.agent, context.bindings, retrieved)
    prompt = PromptText(base_prompt.text, base_prompt.digest,
                        scenario_key=context.scenario_key, meta=base_prompt.meta)

    responses = []
    payloads = None
    parse_warnings: tuple[str, ...] = ()
    for _ in range(stage_config.max_repair_attempts + 1):
        response = context.runtime.invoke(context.agent, prompt)
        responses.append(response)
        _log_response(store, context, stage_config.stage, response)
        outcome = parse_stage_output(stage_config.stage, response.raw_text)
        if isinstance(outcome, ParseFailure):
            repair = (f"{prompt.text}\n\nYour previous response could not be used: "
                      f"{outcome.diagnostic()}. Reply again with exactly one JSON "
                      f"document in a fenced code block.")
            prompt = PromptText(repair, base_prompt.digest,
                                scenario_key=context.scenario_key, meta=base_prompt.meta)
            continue
        payloads, parse_warnings = outcome
        break
    if payloads is None:
        raise StageFailureError(
            f"stage {stage_config.stage!r} could not parse the agent response after "
            f"{stage_config.max_repair_attempts + 1} attempts",
            raw_responses=[r.raw_text for r in responses])

    sink = context.warnings_sink if context.warnings_sink is not None else []
    sink.extend(parse_warnings)
    if len(payloads) > stage_config.effective_fanout:
        sink.append(f"stage {stage_config.stage}: fanout {len(payloads)} exceeds limit "
                    f"{stage_config.effective_fanout}; output truncated")
        payloads = payloads[:stage_config.effective_fanout]

    outputs = _build_artifacts(stage_config.stage, payloads, input_artifact, context, sink)
    for artifact in outputs:
        report = art.validate_artifact(artifact, store)
        if not report.ok:
            raise StageFailureError(
                f"stage {stage_config.stage!r} produced an invalid artifact: "
                f"{report.violations[0][0]}: {report.violations[0][1]}",
                raw_responses=[r.raw_text for r in responses])
        store.put(artifact)
    return outputs


def _build_artifacts(stage: str, payloads: list, input_artifact, context: StageContext,
                     sink: list) -> list:
    if stage == "plan":
        doc = payloads[0]
        plan = art.VerificationPlan(
            id="", spec_ref=input_artifact.id,
            sections=tuple(art.PlanSection.from_doc(s) for s in doc["sections"]),
            signal_table=tuple(art.PortDecl.from_doc(p) for p in doc["signal_table"]))
        return [art.assign_id(plan)]
    if stage == "features":
        feats = art.FeatureList(
            id="", plan_ref=input_artifact.id,
            features=tuple(art.Feature.from_doc(f) for f in payloads))
        return [art.assign_id(feats)]
    if stage == "checkpoints":
        out = []
        feature_list_id = context.lineage[0]
        for doc in payloads:
            cp = art.Checkpoint(
                id="", feature_ref=(feature_list_id, input_artifact.feature_id),
                description=doc["description"], signals=tuple(doc["signals"]),
                trigger=doc["trigger"], expected=doc["expected"], timing=doc["timing"])
            out.append(art.assign_id(cp))
        return out
    # svas
    out = []
    for text in payloads:
        ast = None
        syntax_ok = False
        warnings: list[str] = []
        try:
            ast = parse_assertion(text)
            syntax_ok = True
        except SvaParseError as exc:
            warnings.append(f"syntax: {exc}")
        if ast is not None and context.plan_signals:
            unknown = sorted(sva_ast.collect_signals(ast) - set(context.plan_signals))
            if unknown:
                # still syntactically fine; flagged for downstream review
                warnings.append("semantic_warning: signals not in plan signal_table: "
                                + ", ".join(unknown))
        sva = art.SvaAssertion(
            id="", source_text=text, checkpoint_ref=input_artifact.id, ast=ast,
            syntax_ok=syntax_ok, lineage=(input_artifact.id,) + context.lineage,
            semantic_warnings=tuple(warnings))
        out.append(art.assign_id(sva))
    return out


# --------------------------------------------------------------------------
# Whole-pipeline orchestration

def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_run_id(spec_id: str, config: PipelineConfig) -> str:
    return content_id("run", {"spec": spec_id, "config": config.snapshot(),
                              "created": _now()})


def run_pipeline(spec: art.DesignSpec, config: PipelineConfig, store: ArtifactStore,
                 runtime: AgentRuntime, run_id: str | None = None) -> art.PipelineRun:
    """Execute all stages in order; resumable and idempotent per run id.

    A stage failure leaves the run in the failed state with completed
    stages preserved; re-invoking with the same run id re-attempts only
    the unfinished stages.
    """
    report = art.validate_artifact(spec)
    if not report.ok:
        raise AssertflowError(f"design spec failed validation: {report.violations[0][1]}")
    store.put(spec)

    if run_id is not None and store.has_run(run_id):
        run = store.load_run(run_id)
        if run.spec_ref != spec.id:
            raise AssertflowError(
                f"run {run_id!r} belongs to spec {run.spec_ref!r}, not {spec.id!r}")
        if run.status == "failed":
            # clear the failure marker so the failed stage can re-run
            for stage in STAGES:
                if run.stage_status[stage] == "failed":
                    run.stage_status[stage] = "pending"
            run.failure = None
    else:
        run = art.PipelineRun(run_id=run_id or new_run_id(spec.id, config),
                              spec_ref=spec.id, config_snapshot=config.snapshot())
        run.timestamps["created"] = _now()
        store.save_run(run)

    slug = slugify(spec.title)
    for stage in STAGES:
        if run.stage_status[stage] == "done":
            continue
        run.transition(stage, "running")
        run.timestamps[f"{stage}_started"] = _now()
        store.save_run(run)
        try:
            produced = _execute_stage(stage, spec, config, store, runtime, run, slug)
        except (StageFailureError, AssertflowError) as exc:
            run.transition(stage, "failed")
            run.failure = {"stage": stage, "error": str(exc),
                           "raw_responses": getattr(exc, "raw_responses", [])}
            run.timestamps[f"{stage}_failed"] = _now()
            store.save_run(run)
            return run
        run.stage_artifacts[stage] = [a.id for a in produced]
        run.counts[stage] = len(produced) if stage != "features" \
            else sum(len(fl.features) for fl in produced)
        run.transition(stage, "done")
        run.timestamps[f"{stage}_done"] = _now()
        store.save_run(run)

    if run.syntax_pass_rate is None and run.sva_syntax:
        run.syntax_pass_rate = pass_rate(list(run.sva_syntax.values()))
        store.save_run(run)
    return run


def _execute_stage(stage: str, spec: art.DesignSpec, config: PipelineConfig,
                   store: ArtifactStore, runtime: AgentRuntime, run: art.PipelineRun,
                   slug: str) -> list:
    stage_config = config.stages[stage]
    agent = config.agents[stage_config.agent]
    produced: list = []

    if stage == "plan":
        bindings = {
            "title": spec.title,
            "spec_body": spec.body,
            "port_table": "\n".join(f"{p.name} ({p.direction}, {p.width} bit): "
                                    f"{p.description}" for p in spec.port_table),
        }
        context = StageContext(runtime, agent, bindings, f"{slug}/plan",
                               warnings_sink=run.warnings,
                               context_store=config.context_store,
                               run_id=run.run_id)
        produced = run_stage(stage_config, spec, store, context)

    elif stage == "features":
        for plan_id in run.stage_artifacts["plan"]:
            plan = store.get(plan_id)
            bindings = {"plan_json": canonical_json(plan.to_doc())}
            context = StageContext(runtime, agent, bindings, f"{slug}/features",
                                   lineage=(plan.id, plan.spec_ref),
                                   warnings_sink=run.warnings, run_id=run.run_id)
            produced.extend(run_stage(stage_config, plan, store, context))

    elif stage == "checkpoints":
        for fl_id in run.stage_artifacts["features"]:
            feature_list = store.get(fl_id)
            plan = store.get(feature_list.plan_ref)
            signal_table = ", ".join(plan.signal_names())
            for feature in feature_list.features:
                bindings = {"feature_json": canonical_json(feature.to_doc()),
                            "signal_table": signal_table}
                context = StageContext(
                    runtime, agent, bindings,
                    f"{slug}/checkpoints/{feature.feature_id}",
                    lineage=(feature_list.id, feature_list.plan_ref, plan.spec_ref),
                    warnings_sink=run.warnings, run_id=run.run_id)
                produced.extend(run_stage(stage_config, feature, store, context))

    elif stage == "svas":
        per_feature_counter: dict[str, int] = {}
        for cp_id in run.stage_artifacts["checkpoints"]:
            checkpoint = store.get(cp_id)
            feature_list = store.get(checkpoint.feature_ref[0])
            plan = store.get(feature_list.plan_ref)
            feature_id = checkpoint.feature_ref[1]
            ordinal = per_feature_counter.get(feature_id, 0)
            per_feature_counter[feature_id] = ordinal + 1
            clock = _clock_name(spec)
            bindings = {"checkpoint_json": canonical_json(checkpoint.to_doc()),
                        "signal_table": ", ".join(plan.signal_names()),
                        "clock": clock}
            context = StageContext(
                runtime, agent, bindings,
                f"{slug}/svas/{feature_id}.{ordinal}",
                lineage=(feature_list.id, feature_list.plan_ref, plan.spec_ref),
                plan_signals=plan.signal_names() + (clock,),
                warnings_sink=run.warnings, run_id=run.run_id)
            outputs = run_stage(stage_config, checkpoint, store, context)
            for sva in outputs:
                run.sva_syntax[sva.id] = sva.syntax_ok
            produced.extend(outputs)

    return produced


def _clock_name(spec: art.DesignSpec) -> str:
    for port in spec.port_table:
        if "clk" in port.name or "clock" in port.name:
            return port.name
    return spec.port_table[0].name if spec.port_table else "clk"
