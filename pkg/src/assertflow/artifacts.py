"""The five intermediate representations of the generation pipeline.

Spec -> Verification Plan -> Feature List -> Checkpoint -> SVA, plus the
run manifest that tracks a pipeline execution. Every artifact serializes
to a self-describing JSON document (``kind`` discriminator plus
``schema_version``) and takes a content-addressed id derived from that
document, so identical retries deduplicate naturally.

All artifact types are immutable values; PipelineRun is the one mutable
state machine and is persisted separately from content-addressed objects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from assertflow.errors import ArtifactParseError, BrokenLineageError
from assertflow.ids import content_id
from assertflow.sva import ast as sva_ast

SCHEMA_VERSION = 1

STAGES = ("plan", "features", "checkpoints", "svas")

# signals inside free-text plan rules are marked `like_this`
_BACKTICK_REF = re.compile(r"`([A-Za-z_][A-Za-z0-9_]*)`")


@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str  # in | out | inout
    width: int
    description: str = ""

    def to_doc(self) -> dict:
        return {"name": self.name, "direction": self.direction,
                "width": self.width, "description": self.description}

    @classmethod
    def from_doc(cls, doc: dict) -> "PortDecl":
        return cls(doc["name"], doc["direction"], doc["width"], doc.get("description", ""))


@dataclass(frozen=True)
class RegisterDecl:
    name: str
    address: int
    description: str = ""

    def to_doc(self) -> dict:
        return {"name": self.name, "address": self.address, "description": self.description}

    @classmethod
    def from_doc(cls, doc: dict) -> "RegisterDecl":
        return cls(doc["name"], doc["address"], doc.get("description", ""))


@dataclass(frozen=True)
class DesignSpec:
    kind = "design_spec"
    id: str
    title: str
    body: str
    port_table: tuple[PortDecl, ...]
    register_map: tuple[RegisterDecl, ...] = ()
    behavior_notes: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "port_table": [p.to_doc() for p in self.port_table],
            "register_map": [r.to_doc() for r in self.register_map],
            "behavior_notes": list(self.behavior_notes),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "DesignSpec":
        return cls(
            id=doc["id"],
            title=doc["title"],
            body=doc["body"],
            port_table=tuple(PortDecl.from_doc(p) for p in doc["port_table"]),
            register_map=tuple(RegisterDecl.from_doc(r) for r in doc.get("register_map", [])),
            behavior_notes=tuple(doc.get("behavior_notes", [])),
        )


@dataclass(frozen=True)
class PlanSection:
    title: str
    function_summary: str
    signal_relations: tuple[str, ...]
    verification_requirements: tuple[str, ...]

    def to_doc(self) -> dict:
        return {"title": self.title, "function_summary": self.function_summary,
                "signal_relations": list(self.signal_relations),
                "verification_requirements": list(self.verification_requirements)}

    @classmethod
    def from_doc(cls, doc: dict) -> "PlanSection":
        return cls(doc["title"], doc["function_summary"],
                   tuple(doc.get("signal_relations", [])),
                   tuple(doc.get("verification_requirements", [])))


@dataclass(frozen=True)
class VerificationPlan:
    kind = "verification_plan"
    id: str
    spec_ref: str
    sections: tuple[PlanSection, ...]
    signal_table: tuple[PortDecl, ...]

    def signal_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.signal_table)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "spec_ref": self.spec_ref,
            "sections": [s.to_doc() for s in self.sections],
            "signal_table": [p.to_doc() for p in self.signal_table],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "VerificationPlan":
        return cls(
            id=doc["id"],
            spec_ref=doc["spec_ref"],
            sections=tuple(PlanSection.from_doc(s) for s in doc["sections"]),
            signal_table=tuple(PortDecl.from_doc(p) for p in doc["signal_table"]),
        )


@dataclass(frozen=True)
class Feature:
    feature_id: str
    title: str
    description: str
    category: str
    signals: tuple[str, ...]
    source_section: str

    def to_doc(self) -> dict:
        return {"feature_id": self.feature_id, "title": self.title,
                "description": self.description, "category": self.category,
                "signals": list(self.signals), "source_section": self.source_section}

    @classmethod
    def from_doc(cls, doc: dict) -> "Feature":
        return cls(doc["feature_id"], doc["title"], doc["description"],
                   doc.get("category", ""), tuple(doc.get("signals", [])),
                   doc["source_section"])


@dataclass(frozen=True)
class FeatureList:
    kind = "feature_list"
    id: str
    plan_ref: str
    features: tuple[Feature, ...]

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "plan_ref": self.plan_ref,
            "features": [f.to_doc() for f in self.features],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "FeatureList":
        return cls(id=doc["id"], plan_ref=doc["plan_ref"],
                   features=tuple(Feature.from_doc(f) for f in doc["features"]))


@dataclass(frozen=True)
class Checkpoint:
    kind = "checkpoint"
    id: str
    feature_ref: tuple[str, str]  # (FeatureList id, feature_id); one feature owns many
    description: str
    signals: tuple[str, ...]
    trigger: str  # condition prose; deliberately not parsed
    expected: str
    timing: str

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "feature_ref": list(self.feature_ref),
            "description": self.description,
            "signals": list(self.signals),
            "trigger": self.trigger,
            "expected": self.expected,
            "timing": self.timing,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Checkpoint":
        ref = doc["feature_ref"]
        return cls(id=doc["id"], feature_ref=(ref[0], ref[1]),
                   description=doc["description"], signals=tuple(doc.get("signals", [])),
                   trigger=doc["trigger"], expected=doc["expected"], timing=doc["timing"])


@dataclass(frozen=True)
class SvaAssertion:
    kind = "sva_assertion"
    id: str
    source_text: str
    checkpoint_ref: str | None = None  # optional: golden corpus entries stand alone
    ast: sva_ast.SvaAst | None = None
    syntax_ok: bool = False
    lineage: tuple[str, ...] = ()  # ancestor ids, nearest first
    semantic_warnings: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "source_text": self.source_text,
            "checkpoint_ref": self.checkpoint_ref,
            "ast": sva_ast.ast_to_doc(self.ast) if self.ast is not None else None,
            "syntax_ok": self.syntax_ok,
            "lineage": list(self.lineage),
            "semantic_warnings": list(self.semantic_warnings),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SvaAssertion":
        ast_doc = doc.get("ast")
        return cls(
            id=doc["id"],
            source_text=doc["source_text"],
            checkpoint_ref=doc.get("checkpoint_ref"),
            ast=sva_ast.ast_from_doc(ast_doc) if ast_doc is not None else None,
            syntax_ok=doc["syntax_ok"],
            lineage=tuple(doc.get("lineage", [])),
            semantic_warnings=tuple(doc.get("semantic_warnings", [])),
        )


_STATUS_ORDER = {"pending": 0, "running": 1, "done": 2, "failed": 2}


@dataclass
class PipelineRun:
    kind = "pipeline_run"
    run_id: str
    spec_ref: str
    stage_artifacts: dict[str, list[str]] = field(default_factory=dict)
    stage_status: dict[str, str] = field(default_factory=lambda: {s: "pending" for s in STAGES})
    timestamps: dict[str, str] = field(default_factory=dict)
    config_snapshot: dict = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    sva_syntax: dict[str, bool] = field(default_factory=dict)
    syntax_pass_rate: float | None = None
    warnings: list[str] = field(default_factory=list)
    failure: dict | None = None

    def transition(self, stage: str, status: str) -> None:
        """pending -> running -> done|failed, never backwards."""
        current = self.stage_status[stage]
        if _STATUS_ORDER[status] < _STATUS_ORDER[current] or \
                (current in ("done", "failed") and status != current):
            raise ValueError(f"illegal status transition {current} -> {status} for {stage}")
        self.stage_status[stage] = status

    @property
    def status(self) -> str:
        if any(s == "failed" for s in self.stage_status.values()):
            return "failed"
        if all(s == "done" for s in self.stage_status.values()):
            return "done"
        if any(s != "pending" for s in self.stage_status.values()):
            return "running"
        return "pending"

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "spec_ref": self.spec_ref,
            "stage_artifacts": {k: list(v) for k, v in self.stage_artifacts.items()},
            "stage_status": dict(self.stage_status),
            "timestamps": dict(self.timestamps),
            "config_snapshot": self.config_snapshot,
            "counts": dict(self.counts),
            "sva_syntax": dict(self.sva_syntax),
            "syntax_pass_rate": self.syntax_pass_rate,
            "warnings": list(self.warnings),
            "failure": self.failure,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PipelineRun":
        return cls(
            run_id=doc["run_id"],
            spec_ref=doc["spec_ref"],
            stage_artifacts={k: list(v) for k, v in doc.get("stage_artifacts", {}).items()},
            stage_status=dict(doc["stage_status"]),
            timestamps=dict(doc.get("timestamps", {})),
            config_snapshot=doc.get("config_snapshot", {}),
            counts=dict(doc.get("counts", {})),
            sva_syntax=dict(doc.get("sva_syntax", {})),
            syntax_pass_rate=doc.get("syntax_pass_rate"),
            warnings=list(doc.get("warnings", [])),
            failure=doc.get("failure"),
        )


PipelineArtifact = (DesignSpec, VerificationPlan, FeatureList, Checkpoint, SvaAssertion)

_KINDS = {
    "design_spec": DesignSpec,
    "verification_plan": VerificationPlan,
    "feature_list": FeatureList,
    "checkpoint": Checkpoint,
    "sva_assertion": SvaAssertion,
    "pipeline_run": PipelineRun,
}


def assign_id(artifact):
    """Return the artifact with its content-addressed id filled in."""
    doc = artifact.to_doc()
    return replace(artifact, id=content_id(artifact.kind, doc))


def serialize_artifact(artifact) -> str:
    from assertflow.ids import canonical_json

    return canonical_json(artifact.to_doc())


def deserialize_artifact(doc_or_text):
    """Decode a document into its typed artifact.

    Malformed documents raise ArtifactParseError; this is a different
    failure from an invariant violation, which validate_artifact reports
    as data.
    """
    import json as _json

    doc = doc_or_text
    if isinstance(doc_or_text, (str, bytes)):
        try:
            doc = _json.loads(doc_or_text)
        except _json.JSONDecodeError as exc:
            raise ArtifactParseError(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArtifactParseError("artifact document must be a JSON object")
    kind = doc.get("kind")
    cls = _KINDS.get(kind)
    if cls is None:
        raise ArtifactParseError(f"unknown artifact kind {kind!r}")
    try:
        return cls.from_doc(doc)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ArtifactParseError(f"malformed {kind} document: {exc}") from exc


# --------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class SchemaReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]  # (path into the artifact, message)


class _Violations:
    def __init__(self) -> None:
        self.items: list[tuple[str, str]] = []

    def add(self, path: str, message: str) -> None:
        self.items.append((path, message))

    def report(self) -> SchemaReport:
        return SchemaReport(ok=not self.items, violations=tuple(self.items))


def validate_artifact(artifact, store=None) -> SchemaReport:
    """Check every type invariant; reference resolution needs a store.

    Pure and deterministic: the same artifact (and store contents) always
    yields the same report.
    """
    v = _Violations()
    if isinstance(artifact, DesignSpec):
        _validate_spec(artifact, v)
    elif isinstance(artifact, VerificationPlan):
        _validate_plan(artifact, v, store)
    elif isinstance(artifact, FeatureList):
        _validate_features(artifact, v, store)
    elif isinstance(artifact, Checkpoint):
        _validate_checkpoint(artifact, v, store)
    elif isinstance(artifact, SvaAssertion):
        _validate_sva(artifact, v, store)
    elif isinstance(artifact, PipelineRun):
        _validate_run(artifact, v)
    else:
        raise TypeError(f"not a pipeline artifact: {artifact!r}")
    return v.report()


def _validate_spec(spec: DesignSpec, v: _Violations) -> None:
    if not spec.body.strip():
        v.add("body", "body must be non-empty")
    names = [p.name for p in spec.port_table]
    for name in sorted({n for n in names if names.count(n) > 1}):
        v.add("port_table", f"duplicate port name {name!r}")
    for i, port in enumerate(spec.port_table):
        if port.width < 1:
            v.add(f"port_table[{i}].width", f"width must be >= 1, got {port.width}")
        if port.direction not in ("in", "out", "inout"):
            v.add(f"port_table[{i}].direction", f"invalid direction {port.direction!r}")


def _validate_plan(plan: VerificationPlan, v: _Violations, store) -> None:
    if not plan.sections:
        v.add("sections", "plan must have at least one section")
    table = set(plan.signal_names())
    for si, section in enumerate(plan.sections):
        for ri, rule in enumerate(section.signal_relations):
            for name in _BACKTICK_REF.findall(rule):
                if name not in table:
                    v.add(f"sections[{si}].signal_relations[{ri}]",
                          f"signal {name!r} not in signal_table")
    if store is not None and not _resolves(store, plan.spec_ref, DesignSpec):
        v.add("spec_ref", f"design spec {plan.spec_ref!r} not found")


def _validate_features(feats: FeatureList, v: _Violations, store) -> None:
    seen: set[str] = set()
    for i, f in enumerate(feats.features):
        if f.feature_id in seen:
            v.add(f"features[{i}].feature_id", f"duplicate feature_id {f.feature_id!r}")
        seen.add(f.feature_id)
    if store is not None:
        plan = _fetch(store, feats.plan_ref, VerificationPlan)
        if plan is None:
            v.add("plan_ref", f"verification plan {feats.plan_ref!r} not found")
        else:
            table = set(plan.signal_names())
            titles = {s.title for s in plan.sections}
            for i, f in enumerate(feats.features):
                for s in f.signals:
                    if s not in table:
                        v.add(f"features[{i}].signals", f"signal {s!r} not in plan signal_table")
                if f.source_section not in titles:
                    v.add(f"features[{i}].source_section",
                          f"section {f.source_section!r} not in plan")


def _validate_checkpoint(cp: Checkpoint, v: _Violations, store) -> None:
    if not cp.signals:
        v.add("signals", "checkpoint must name at least one signal")
    for fld in ("trigger", "expected", "timing"):
        if not getattr(cp, fld).strip():
            v.add(fld, f"{fld} prose must be non-empty")
    if store is not None:
        feats = _fetch(store, cp.feature_ref[0], FeatureList)
        if feats is None:
            v.add("feature_ref", f"feature list {cp.feature_ref[0]!r} not found")
        elif cp.feature_ref[1] not in {f.feature_id for f in feats.features}:
            v.add("feature_ref", f"feature {cp.feature_ref[1]!r} not in feature list")


def _validate_sva(sva: SvaAssertion, v: _Violations, store) -> None:
    if sva.syntax_ok and sva.ast is None:
        v.add("ast", "syntax_ok is set but no AST is present")
    if not sva.syntax_ok and sva.ast is not None:
        v.add("syntax_ok", "AST present but syntax_ok is false")
    if not sva.source_text.strip():
        v.add("source_text", "assertion text must be non-empty")
    if sva.lineage:
        expected = [Checkpoint, FeatureList, VerificationPlan, DesignSpec]
        if len(sva.lineage) != len(expected):
            v.add("lineage", f"lineage must have {len(expected)} ancestors, "
                             f"got {len(sva.lineage)}")
        elif store is not None:
            for aid, cls in zip(sva.lineage, expected):
                got = _fetch(store, aid, None)
                if got is None:
                    v.add("lineage", f"ancestor {aid!r} not found")
                elif not isinstance(got, cls):
                    v.add("lineage", f"ancestor {aid!r} is {got.kind}, expected {cls.kind}")


def _validate_run(run: PipelineRun, v: _Violations) -> None:
    for status in run.stage_status.values():
        if status not in _STATUS_ORDER:
            v.add("stage_status", f"unknown status {status!r}")
    previous_done = True
    for stage in STAGES:
        has_artifacts = bool(run.stage_artifacts.get(stage))
        if has_artifacts and not previous_done:
            v.add(f"stage_artifacts.{stage}",
                  "stage has artifacts although a prior stage is not done")
        previous_done = run.stage_status.get(stage) == "done"


def _fetch(store, artifact_id: str, cls):
    try:
        artifact = store.get(artifact_id)
    except Exception:
        return None
    if cls is not None and not isinstance(artifact, cls):
        return None
    return artifact


def _resolves(store, artifact_id: str, cls) -> bool:
    return _fetch(store, artifact_id, cls) is not None


# --------------------------------------------------------------------------
# Lineage

def parent_ref(artifact) -> str | None:
    """Id of the immediate ancestor, or None at the root."""
    if isinstance(artifact, DesignSpec):
        return None
    if isinstance(artifact, VerificationPlan):
        return artifact.spec_ref
    if isinstance(artifact, FeatureList):
        return artifact.plan_ref
    if isinstance(artifact, Checkpoint):
        return artifact.feature_ref[0]
    if isinstance(artifact, SvaAssertion):
        return artifact.checkpoint_ref
    raise TypeError(f"artifact has no lineage: {artifact!r}")


def trace_lineage(artifact_id: str, store) -> list:
    """Walk ref fields up to the design spec; ids are fresh per artifact,
    so the walk always terminates."""
    chain = []
    current_id: str | None = artifact_id
    via = "(request)"
    while current_id is not None:
        try:
            artifact = store.get(current_id)
        except Exception as exc:
            raise BrokenLineageError(current_id, via) from exc
        chain.append(artifact)
        via = getattr(artifact, "id", current_id)
        current_id = parent_ref(artifact)
    return chain


def iter_features(feature_list: FeatureList) -> Iterable[Feature]:
    return iter(feature_list.features)


def artifact_kind(artifact) -> str:
    return artifact.kind


def doc_of(artifact) -> dict[str, Any]:
    return artifact.to_doc()
