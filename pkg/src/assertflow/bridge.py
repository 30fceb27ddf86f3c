"""Closed-loop training-data synthesis with validated candidates.

Golden-anchored generation (every candidate must derive from an
expert-verified golden input), coverage-gap augmentation, hybrid
validation, and dataset construction:

* decomposition tasks (plan -> features, feature -> checkpoints) validate
  directly: schema checks or an expert review queue;
* the 1:1 task (golden SVA -> checkpoint) validates by reverse
  generation: k independent agents regenerate an assertion from the
  candidate checkpoint, and the candidate is accepted only if every one
  of the k regenerations parses and is bounded-equivalent to the golden
  original (unanimity, not majority: purity over completeness).

Accepted candidates become dataset records whose chain-of-thought text is
template-rendered from the recorded validation evidence, so each record's
reasoning trace can be replayed and re-verified.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

from assertflow import artifacts as art
from assertflow.agents import (
    AgentRuntime,
    AgentSpec,
    PromptText,
    StochasticErrorModel,
    render_prompt,
)
from assertflow.equiv import check_equivalence, random_trace
from assertflow.errors import (
    AssertflowError,
    GroupInvocationError,
    PendingOutcomesError,
    UndefinedRateError,
)
from assertflow.ids import canonical_json, content_id, digest_hex, normalized_digest
from assertflow.metrics import _round2
from assertflow.pipeline import ParseFailure, parse_stage_output
from assertflow.store import ReviewQueue
from assertflow.sva import ast as sva_ast
from assertflow.sva.parser import check_syntax, parse_assertion
from assertflow.sva.semantics import Verdict, eval_assertion

TASKS = ("plan_to_features", "feature_to_checkpoints", "sva_to_checkpoint")

PROVENANCE_MARKER = "expert_verified"

DEFAULT_GTP_FRACTION = 0.9


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class GoldenItem:
    """An expert-verified input anchoring one synthesis task."""

    id: str
    task: str
    payload: dict
    provenance: dict  # marker, reviewer, timestamp

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.provenance.get("marker") != PROVENANCE_MARKER:
            raise ValueError("golden items require an expert-verified provenance marker")
        if not self.provenance.get("reviewer"):
            raise ValueError("golden provenance requires a reviewer id")

    def to_doc(self) -> dict:
        return {"kind": "golden_item", "schema_version": 1, "id": self.id,
                "task": self.task, "payload": self.payload, "provenance": self.provenance}

    @classmethod
    def from_doc(cls, doc: dict) -> "GoldenItem":
        return cls(doc["id"], doc["task"], doc["payload"], doc["provenance"])


_CANDIDATE_STATUS_ORDER = {"pending": 0, "expert_pending": 1, "accepted": 2, "rejected": 2}


@dataclass
class Candidate:
    """A generated artifact tied to the golden input it derives from.

    Construction requires the resolving GoldenItem, so an output that
    does not trace back to verified input cannot exist.
    """

    id: str
    golden_ref: str
    payload: dict
    origin: dict  # {"kind": "generated"} or {"kind": "augmented", "gap": {...}}
    status: str = "pending"
    rejection_reason: str | None = None

    def __post_init__(self) -> None:
        if not self.golden_ref:
            raise ValueError("candidate requires a resolving golden_ref")
        if self.status not in _CANDIDATE_STATUS_ORDER:
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def create(cls, golden: GoldenItem, payload: dict, origin: dict) -> "Candidate":
        body = {"golden_ref": golden.id, "payload": payload, "origin": origin}
        return cls(id=content_id("candidate", body), golden_ref=golden.id,
                   payload=payload, origin=origin)

    def transition(self, status: str, reason: str | None = None) -> None:
        current = _CANDIDATE_STATUS_ORDER[self.status]
        target = _CANDIDATE_STATUS_ORDER[status]
        if target < current or (self.status in ("accepted", "rejected")
                                and status != self.status):
            raise ValueError(f"illegal candidate transition {self.status} -> {status}")
        self.status = status
        if status == "rejected":
            self.rejection_reason = reason

    def to_doc(self) -> dict:
        return {"kind": "candidate", "schema_version": 1, "id": self.id,
                "golden_ref": self.golden_ref, "payload": self.payload,
                "origin": self.origin, "status": self.status,
                "rejection_reason": self.rejection_reason}

    @classmethod
    def from_doc(cls, doc: dict) -> "Candidate":
        return cls(doc["id"], doc["golden_ref"], doc["payload"], doc["origin"],
                   doc.get("status", "pending"), doc.get("rejection_reason"))


@dataclass(frozen=True)
class CandidateSet:
    golden_ref: str
    candidates: tuple[Candidate, ...]
    warnings: tuple[str, ...] = ()
    raw_responses: tuple[str, ...] = ()


@dataclass(frozen=True)
class Gap:
    kind: str  # signal | section
    value: str

    def to_doc(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class EvidenceStep:
    description: str
    inputs: dict
    result: dict

    def to_doc(self) -> dict:
        return {"description": self.description, "inputs": self.inputs,
                "result": self.result}

    @classmethod
    def from_doc(cls, doc: dict) -> "EvidenceStep":
        return cls(doc["description"], doc["inputs"], doc["result"])


@dataclass(frozen=True)
class ValidationOutcome:
    candidate_ref: str
    method: str  # direct | bridged | reverse_k | expert
    verdict: str  # positive | negative
    evidence: tuple[EvidenceStep, ...]
    k: int | None = None  # for reverse_k
    label: str | None = None  # GTP | GTN ground truth, evaluation runs only
    infrastructure_failure: bool = False

    def __post_init__(self) -> None:
        if self.method == "reverse_k":
            checks = [s for s in self.evidence if "equivalence" in s.result]
            if not self.infrastructure_failure and len(checks) != (self.k or 0):
                raise ValueError(
                    f"reverse_k evidence must contain exactly k={self.k} equivalence "
                    f"checks, found {len(checks)}")
            if not self.infrastructure_failure:
                unanimous = all(s.result["equivalence"] == "equivalent" for s in checks)
                if (self.verdict == "positive") != unanimous:
                    raise ValueError("reverse_k verdict must be positive exactly when "
                                     "all k checks are equivalent")

    def to_doc(self) -> dict:
        return {"kind": "validation_outcome", "schema_version": 1,
                "id": self.outcome_id(),
                "candidate_ref": self.candidate_ref, "method": self.method,
                "verdict": self.verdict, "k": self.k, "label": self.label,
                "infrastructure_failure": self.infrastructure_failure,
                "evidence": [s.to_doc() for s in self.evidence]}

    def outcome_id(self) -> str:
        return content_id("outcome", {
            "candidate_ref": self.candidate_ref, "method": self.method,
            "verdict": self.verdict, "k": self.k,
            "evidence": [s.to_doc() for s in self.evidence]})

    @classmethod
    def from_doc(cls, doc: dict) -> "ValidationOutcome":
        return cls(candidate_ref=doc["candidate_ref"], method=doc["method"],
                   verdict=doc["verdict"],
                   evidence=tuple(EvidenceStep.from_doc(s) for s in doc["evidence"]),
                   k=doc.get("k"), label=doc.get("label"),
                   infrastructure_failure=doc.get("infrastructure_failure", False))


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    stage: str  # task tag
    instruction: str
    input: str
    output: str
    cot: str
    lineage: dict  # golden_ref, candidate_ref, outcome_ref
    validation: dict  # method + verdict summary

    def to_doc(self) -> dict:
        return {"id": self.id, "stage": self.stage, "instruction": self.instruction,
                "input": self.input, "output": self.output, "cot": self.cot,
                "lineage": self.lineage, "validation": self.validation}


@dataclass(frozen=True)
class FilterStats:
    k: int | None
    n_items: int
    tp: int
    fp: int
    tn: int
    fn: int
    fp_rate: float | None  # percent of ground-truth negatives accepted
    fn_rate: float | None  # percent of ground-truth positives rejected
    precision: float | None  # TP/(TP+FP) * 100; None when undefined

    def __post_init__(self) -> None:
        if self.tp + self.fp + self.tn + self.fn != self.n_items:
            raise ValueError("confusion counts must sum to n_items")

    @classmethod
    def from_confusion(cls, k: int | None, tp: int, fp: int, tn: int, fn: int,
                       ) -> "FilterStats":
        negatives = fp + tn
        positives = tp + fn
        return cls(
            k=k, n_items=tp + fp + tn + fn, tp=tp, fp=fp, tn=tn, fn=fn,
            fp_rate=_round2(Fraction(fp, negatives) * 100) if negatives else None,
            fn_rate=_round2(Fraction(fn, positives) * 100) if positives else None,
            precision=_round2(Fraction(tp, tp + fp) * 100) if tp + fp else None,
        )

    def to_doc(self) -> dict:
        return {"k": self.k, "n_items": self.n_items,
                "confusion": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
                "fp_rate": self.fp_rate, "fn_rate": self.fn_rate,
                "precision": self.precision}


# --------------------------------------------------------------------------
# Golden ingestion

def ingest_golden(raw_artifacts: list, reviewer: str) -> list[GoldenItem]:
    """Stamp verified artifacts with provenance and shape them per task.

    Plans anchor feature synthesis; feature lists expand to one golden
    item per feature; parsed assertions anchor the 1:1 checkpoint task.
    Artifacts missing what their task needs are rejected outright.
    """
    if not reviewer:
        raise AssertflowError("golden ingestion requires a reviewer id")
    items: list[GoldenItem] = []
    timestamp = _now()
    provenance = {"marker": PROVENANCE_MARKER, "reviewer": reviewer,
                  "timestamp": timestamp}
    for artifact in raw_artifacts:
        if isinstance(artifact, art.VerificationPlan):
            report = art.validate_artifact(artifact)
            if not report.ok:
                raise AssertflowError(
                    f"golden plan fails validation: {report.violations[0][1]}")
            payload = {"plan": artifact.to_doc()}
            task = "plan_to_features"
        elif isinstance(artifact, art.FeatureList):
            report = art.validate_artifact(artifact)
            if not report.ok:
                raise AssertflowError(
                    f"golden feature list fails validation: {report.violations[0][1]}")
            for feature in artifact.features:
                payload = {"feature": feature.to_doc(), "plan_ref": artifact.plan_ref}
                items.append(GoldenItem(
                    id=content_id("golden", {"task": "feature_to_checkpoints",
                                             "payload": payload}),
                    task="feature_to_checkpoints", payload=payload,
                    provenance=provenance))
            continue
        elif isinstance(artifact, art.SvaAssertion):
            if not artifact.syntax_ok or artifact.ast is None:
                raise AssertflowError(
                    "golden assertion must parse; reverse validation needs its AST")
            payload = {"sva": artifact.to_doc(),
                       "signals": sorted(sva_ast.collect_signals(artifact.ast))}
            task = "sva_to_checkpoint"
        else:
            raise AssertflowError(
                f"cannot anchor synthesis on a {type(artifact).__name__}")
        items.append(GoldenItem(
            id=content_id("golden", {"task": task, "payload": payload}),
            task=task, payload=payload, provenance=provenance))
    return items


def _require_provenance(golden: GoldenItem) -> None:
    if golden.provenance.get("marker") != PROVENANCE_MARKER or \
            not golden.provenance.get("reviewer"):
        raise AssertflowError(
            "refusing to synthesize from unverified input: golden provenance "
            "(expert_verified marker with reviewer) is required")


# --------------------------------------------------------------------------
# Generation and augmentation

_TASK_STAGE = {"plan_to_features": "features",
               "feature_to_checkpoints": "checkpoints",
               "sva_to_checkpoint": "checkpoints"}


def _task_template(task: str) -> str:
    return resources.files("assertflow.data.prompts").joinpath(
        f"bridge_{task}.txt").read_text()


def _golden_json(golden: GoldenItem) -> str:
    return canonical_json(golden.payload)


def generate_candidates(golden: GoldenItem, agent: AgentSpec, runtime: AgentRuntime,
                        max_repair_attempts: int = 2) -> CandidateSet:
    """One agent call producing the initial candidate set.

    Schema-invalid items are dropped with a diagnostic; the 1:1 task keeps
    exactly one candidate. Raw responses are retained verbatim.
    """
    _require_provenance(golden)
    template_spec = replace(agent, role_prompt=_task_template(golden.task))
    bindings = {"golden_json": _golden_json(golden), "gap_note": "",
                "scenario_key": f"bridge/{golden.task}/{golden.id}"}
    prompt = render_prompt(template_spec, bindings)
    prompt = PromptText(prompt.text, prompt.digest, scenario_key=bindings["scenario_key"])

    responses = []
    payloads = None
    warnings: list[str] = []
    stage = _TASK_STAGE[golden.task]
    for _ in range(max_repair_attempts + 1):
        response = runtime.invoke(agent, prompt)
        responses.append(response.raw_text)
        outcome = parse_stage_output(stage, response.raw_text, drop_invalid_items=True)
        if isinstance(outcome, ParseFailure):
            prompt = PromptText(
                f"{prompt.text}\n\nYour previous response could not be used: "
                f"{outcome.diagnostic()}.", prompt.digest,
                scenario_key=bindings["scenario_key"])
            continue
        payloads, parse_warnings = outcome
        warnings.extend(parse_warnings)
        break
    if payloads is None:
        raise AssertflowError(
            f"candidate generation failed to produce a parseable response for "
            f"golden {golden.id}")

    if golden.task == "sva_to_checkpoint" and len(payloads) > 1:
        warnings.append(f"1:1 task returned {len(payloads)} checkpoints; keeping the first")
        payloads = payloads[:1]

    candidates = [Candidate.create(golden, payload, {"kind": "generated"})
                  for payload in payloads]
    if not candidates:
        raise AssertflowError(
            f"no schema-valid candidates for golden {golden.id}: "
            + "; ".join(warnings))
    return CandidateSet(golden.id, tuple(candidates), tuple(warnings), tuple(responses))


def _candidate_payload_problem(task: str, payload: dict) -> str | None:
    if task == "plan_to_features":
        for key in ("feature_id", "title", "description", "source_section"):
            if not payload.get(key):
                return f"feature missing {key}"
        return None
    for key in ("description", "trigger", "expected", "timing"):
        if not payload.get(key):
            return f"checkpoint missing {key}"
    if not payload.get("signals"):
        return "checkpoint missing signals"
    return None


def coverage_gaps(golden: GoldenItem, candidates: list[Candidate] | tuple) -> list[Gap]:
    """Golden-side elements no candidate touches, in golden order."""
    for candidate in candidates:
        if candidate.golden_ref != golden.id:
            raise AssertflowError(
                f"candidate {candidate.id} does not reference golden {golden.id}")
    if golden.task == "plan_to_features":
        plan = art.VerificationPlan.from_doc(golden.payload["plan"])
        covered_signals = {s for c in candidates for s in c.payload.get("signals", [])}
        covered_sections = {c.payload.get("source_section") for c in candidates}
        gaps = [Gap("signal", name) for name in plan.signal_names()
                if name not in covered_signals]
        gaps += [Gap("section", s.title) for s in plan.sections
                 if s.title not in covered_sections]
        return gaps
    if golden.task == "feature_to_checkpoints":
        feature = art.Feature.from_doc(golden.payload["feature"])
        covered = {s for c in candidates for s in c.payload.get("signals", [])}
        return [Gap("signal", name) for name in feature.signals if name not in covered]
    return []  # the 1:1 task has no decomposition coverage to fill


def augment(golden: GoldenItem, candidates: CandidateSet, agent_group: AgentSpec,
            runtime: AgentRuntime) -> CandidateSet:
    """Fill coverage gaps with one group-member invocation per gap.

    The augmented set is the gap-free union, deduplicated by normalized
    payload digest (LLM output differs trivially in formatting). Member
    failures degrade to partial augmentation with warnings.
    """
    _require_provenance(golden)
    gaps = coverage_gaps(golden, candidates.candidates)
    warnings = list(candidates.warnings)
    if not gaps:
        return CandidateSet(golden.id, _dedup(candidates.candidates),
                            tuple(warnings), candidates.raw_responses)

    template = _task_template(golden.task)
    stage = _TASK_STAGE[golden.task]

    def prompt_for(index: int) -> PromptText:
        gap = gaps[index]
        note = (f"\nCoverage gap: no candidate covers {gap.kind} '{gap.value}'. "
                f"Produce one item specifically covering it.\n")
        spec_with_template = replace(agent_group, role_prompt=template)
        rendered = render_prompt(spec_with_template,
                                 {"golden_json": _golden_json(golden), "gap_note": note})
        key = f"bridge/{golden.task}/{golden.id}/gap/{gap.kind}:{gap.value}"
        return PromptText(rendered.text, rendered.digest, scenario_key=key)

    responses = []
    try:
        group = runtime.invoke_group(agent_group, len(gaps), prompt_for)
        indexed = list(enumerate(group))
    except GroupInvocationError as exc:
        warnings.append(f"augmentation degraded: {exc}")
        indexed = sorted(exc.partial.items())

    new_candidates: list[Candidate] = []
    for index, response in indexed:
        responses.append(response.raw_text)
        outcome = parse_stage_output(stage, response.raw_text, drop_invalid_items=True)
        if isinstance(outcome, ParseFailure):
            warnings.append(f"gap {gaps[index].value!r}: unusable response "
                            f"({outcome.message})")
            continue
        payloads, parse_warnings = outcome
        warnings.extend(parse_warnings)
        for payload in payloads:
            new_candidates.append(Candidate.create(
                golden, payload, {"kind": "augmented", "gap": gaps[index].to_doc()}))

    merged = _dedup(tuple(candidates.candidates) + tuple(new_candidates))
    return CandidateSet(golden.id, merged, tuple(warnings),
                        candidates.raw_responses + tuple(responses))


def _dedup(candidates: tuple[Candidate, ...]) -> tuple[Candidate, ...]:
    seen: set[str] = set()
    out = []
    for candidate in candidates:
        digest = normalized_digest(candidate.payload)
        if digest in seen:
            continue
        seen.add(digest)
        out.append(candidate)
    return tuple(out)


# --------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class EquivCheckConfig:
    bound: int | None = None  # None: span-derived default
    mode: str = "auto"
    sample_n: int = 10_000
    seed: int = 0


def extract_assertion_text(raw: str) -> str:
    """First assertion-looking line of a response, fences stripped."""
    text = raw.strip()
    for line in text.splitlines():
        line = line.strip().strip("`")
        if "assert property" in line:
            return line
    return text


def validate_reverse(golden_sva: art.SvaAssertion, candidate: Candidate, k: int,
                     equiv_config: EquivCheckConfig, agent: AgentSpec,
                     runtime: AgentRuntime) -> ValidationOutcome:
    """k independent regenerations, each checked against the golden.

    Positive requires unanimity: every regeneration parses and every one
    is bounded-equivalent. Infrastructure failures are negative but
    flagged, so they are distinguishable from semantic rejection.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if golden_sva.ast is None:
        raise AssertflowError("reverse validation requires a parsed golden assertion")
    clock = golden_sva.ast.clock_signal

    def prompt_for(index: int) -> PromptText:
        spec_with_template = replace(
            agent, role_prompt=_task_template("reverse_sva"))
        rendered = render_prompt(spec_with_template, {
            "checkpoint_json": canonical_json(candidate.payload),
            "clock": clock,
            "meta_reference_text": golden_sva.source_text,
            "meta_item_key": candidate.id,
        })
        key = f"bridge/reverse/{candidate.id}"
        return PromptText(rendered.text, rendered.digest, scenario_key=key,
                          meta=rendered.meta)

    try:
        responses = runtime.invoke_group(agent, k, prompt_for)
    except GroupInvocationError as exc:
        steps = tuple(
            EvidenceStep(
                description=f"reverse generation {i + 1} of {k}",
                inputs={"checkpoint": candidate.payload},
                result={"error": "infrastructure", "detail": str(exc)})
            for i in range(k))
        return ValidationOutcome(candidate.id, "reverse_k", "negative", steps, k=k,
                                 infrastructure_failure=True)

    steps = []
    all_equivalent = True
    signals = sorted(sva_ast.collect_signals(golden_sva.ast))
    for index, response in enumerate(responses):
        generated = extract_assertion_text(response.raw_text)
        report = check_syntax(generated)
        step_inputs = {
            "checkpoint": candidate.payload,
            "generated_sva": generated,
            "golden_sva": golden_sva.source_text,
            "signals": signals,
            "bound": equiv_config.bound,
            "mode": equiv_config.mode,
            "sample_n": equiv_config.sample_n,
            "seed": equiv_config.seed,
        }
        if not report.ok:
            diag = report.diagnostics[0]
            steps.append(EvidenceStep(
                description=f"reverse generation {index + 1} of {k}: syntax check",
                inputs=step_inputs,
                result={"syntax_ok": False, "equivalence": "not_parsed",
                        "diagnostic": f"{diag.line}:{diag.column}: {diag.message}"}))
            all_equivalent = False
            continue
        generated_ast = parse_assertion(generated)
        result = check_equivalence(
            generated_ast, golden_sva.ast, bound=equiv_config.bound,
            mode=equiv_config.mode, sample_n=equiv_config.sample_n,
            seed=equiv_config.seed)
        step_result = {
            "syntax_ok": True,
            "equivalence": result.verdict,
            "traces_checked": result.traces_checked,
            "equiv_mode": result.mode,
        }
        if result.counterexample is not None:
            step_result["counterexample"] = {
                "trace": result.counterexample.trace.to_doc(),
                "attempt_cycle": result.counterexample.attempt_cycle,
                "verdict_generated": result.counterexample.verdict_a.value,
                "verdict_golden": result.counterexample.verdict_b.value,
            }
        steps.append(EvidenceStep(
            description=f"reverse generation {index + 1} of {k}: equivalence check",
            inputs=step_inputs, result=step_result))
        if result.verdict != "equivalent":
            all_equivalent = False

    verdict = "positive" if all_equivalent else "negative"
    return ValidationOutcome(candidate.id, "reverse_k", verdict, tuple(steps), k=k)


def replay_reverse_evidence(outcome: ValidationOutcome) -> bool:
    """Re-run every recorded equivalence check; True if all reproduce
    `equivalent`. The dataset-purity contract for accepted records."""
    if outcome.method != "reverse_k":
        return True
    for step in outcome.evidence:
        if "equivalence" not in step.result:
            continue
        if not step.result.get("syntax_ok"):
            return False
        generated = parse_assertion(step.inputs["generated_sva"])
        golden = parse_assertion(step.inputs["golden_sva"])
        result = check_equivalence(
            generated, golden, bound=step.inputs.get("bound"),
            mode=step.inputs.get("mode", "auto"),
            sample_n=step.inputs.get("sample_n", 10_000),
            seed=step.inputs.get("seed", 0))
        if result.verdict != step.result["equivalence"]:
            return False
    return True


@dataclass(frozen=True)
class SanityConfig:
    n_traces: int = 64
    length: int | None = None  # None: span + 2
    seed: int = 7


def validate_bridged(candidate: Candidate, bridge_agent: AgentSpec,
                     sanity_config: SanityConfig, runtime: AgentRuntime,
                     ) -> ValidationOutcome:
    """Transform the checkpoint into an assertion and sanity-check it.

    The bridged assertion is verifiable when it parses and is non-trivial
    at the sanity bound: over seeded random traces it must both fail at
    least once and pass at least once, rejecting constant properties.
    """
    signals = tuple(candidate.payload.get("signals", ())) or ("a",)

    spec_with_template = replace(bridge_agent, role_prompt=_task_template("reverse_sva"))
    rendered = render_prompt(spec_with_template, {
        "checkpoint_json": canonical_json(candidate.payload),
        "clock": "clk",
    })
    prompt = PromptText(rendered.text, rendered.digest,
                        scenario_key=f"bridge/bridged/{candidate.id}")
    response = runtime.invoke(bridge_agent, prompt)
    generated = extract_assertion_text(response.raw_text)

    report = check_syntax(generated)
    if not report.ok:
        diag = report.diagnostics[0]
        step = EvidenceStep(
            description="bridged transformation: syntax check",
            inputs={"checkpoint": candidate.payload, "bridged_sva": generated},
            result={"syntax_ok": False,
                    "diagnostic": f"{diag.line}:{diag.column}: {diag.message}"})
        return ValidationOutcome(candidate.id, "bridged", "negative", (step,))

    ast = parse_assertion(generated)
    alphabet = tuple(sorted(set(signals) | sva_ast.collect_signals(ast))) or ("a",)
    length = sanity_config.length or (sva_ast.max_span(ast) + 2)
    rng = random.Random(sanity_config.seed)
    n_pass = n_fail = 0
    for _ in range(sanity_config.n_traces):
        trace = random_trace(alphabet, length, rng)
        overall = eval_assertion(ast, trace).overall
        if overall is Verdict.PASS:
            n_pass += 1
        else:
            n_fail += 1
    nontrivial = n_pass > 0 and n_fail > 0
    reason = None if nontrivial else (
        "trivially true at the sanity bound" if n_fail == 0
        else "trivially false at the sanity bound")
    step = EvidenceStep(
        description="bridged transformation: non-triviality sampling",
        inputs={"checkpoint": candidate.payload, "bridged_sva": generated,
                "signals": list(alphabet), "length": length,
                "n_traces": sanity_config.n_traces, "seed": sanity_config.seed},
        result={"syntax_ok": True, "n_pass": n_pass, "n_fail": n_fail,
                "nontrivial": nontrivial, **({"reason": reason} if reason else {})})
    return ValidationOutcome(candidate.id, "bridged",
                             "positive" if nontrivial else "negative", (step,))


@dataclass(frozen=True)
class ExpertTicket:
    item_id: str
    candidate_ref: str


def validate_direct(candidate: Candidate, verifier: str, golden: GoldenItem | None = None,
                    queue: ReviewQueue | None = None):
    """Immediate schema check, or a ticket on the expert review queue.

    The expert path parks the candidate in expert_pending; the outcome
    materializes when a verdict is posted (resolve_expert_ticket).
    """
    if verifier == "schema":
        problem = _candidate_payload_problem(
            _task_from_payload(candidate), candidate.payload)
        verdict = "negative" if problem else "positive"
        step = EvidenceStep(
            description="direct schema validation",
            inputs={"payload": candidate.payload},
            result={"ok": problem is None, **({"problem": problem} if problem else {})})
        candidate.transition("accepted" if verdict == "positive" else "rejected",
                             reason=problem)
        return ValidationOutcome(candidate.id, "direct", verdict, (step,))
    if verifier == "expert_queue":
        if queue is None:
            raise AssertflowError("expert_queue validation requires a review queue")
        item_id = queue.add_item(candidate.id, _task_from_payload(candidate),
                                 candidate.payload,
                                 golden.payload if golden else {})
        candidate.transition("expert_pending")
        return ExpertTicket(item_id=item_id, candidate_ref=candidate.id)
    raise ValueError(f"unknown verifier {verifier!r}")


def _task_from_payload(candidate: Candidate) -> str:
    if "feature_id" in candidate.payload:
        return "plan_to_features"
    return "feature_to_checkpoints"


def resolve_expert_ticket(ticket: ExpertTicket, candidate: Candidate,
                          queue: ReviewQueue) -> ValidationOutcome | None:
    """Convert a decided review item into an outcome; None while open."""
    item = queue.get(ticket.item_id)
    if item.state != "decided":
        return None
    verdict = "positive" if item.verdict == "approve" else "negative"
    candidate.transition("accepted" if verdict == "positive" else "rejected",
                         reason=item.reason)
    step = EvidenceStep(
        description="expert review",
        inputs={"review_item": ticket.item_id},
        result={"verdict": item.verdict, "reviewer": item.reviewer,
                "reason": item.reason, "decided_at": item.decided_at})
    return ValidationOutcome(candidate.id, "expert", verdict, (step,))


def apply_outcome(candidate: Candidate, outcome: ValidationOutcome) -> None:
    """Move a candidate to its terminal status per the outcome verdict."""
    if candidate.status in ("accepted", "rejected"):
        return
    if outcome.verdict == "positive":
        candidate.transition("accepted")
    else:
        reason = "validation negative"
        if outcome.infrastructure_failure:
            reason = "validation infrastructure failure"
        candidate.transition("rejected", reason=reason)


# --------------------------------------------------------------------------
# Dataset construction

_INSTRUCTIONS = {
    "plan_to_features": "Decompose the verification plan into a modular feature list.",
    "feature_to_checkpoints": "Expand the feature into implementation-level checkpoints.",
    "sva_to_checkpoint": "Describe the assertion as a natural-language checkpoint.",
}


@dataclass(frozen=True)
class DatasetFile:
    dataset_id: str
    records: tuple[DatasetRecord, ...]
    jsonl_text: str
    manifest: dict


def build_dataset(outcomes: list[ValidationOutcome], candidates: dict[str, Candidate],
                  goldens: dict[str, GoldenItem], seed: int = 0,
                  val_percent: int = 5) -> DatasetFile:
    """One record per accepted candidate, CoT rendered from its evidence.

    Refuses while any outcome is unresolved. Records deduplicate on the
    (instruction, input, output) digest; the split manifest assigns
    train/val by seeded hash so membership is stable under re-runs.
    """
    pending = [c.id for c in candidates.values()
               if c.status in ("pending", "expert_pending")]
    if pending:
        raise PendingOutcomesError(pending)

    records: list[DatasetRecord] = []
    seen: set[str] = set()
    for outcome in outcomes:
        if outcome.verdict != "positive":
            continue
        candidate = candidates[outcome.candidate_ref]
        if candidate.status != "accepted":
            continue
        golden = goldens[candidate.golden_ref]
        instruction = _INSTRUCTIONS[golden.task]
        input_text = canonical_json(golden.payload)
        output_text = canonical_json(candidate.payload)
        digest = digest_hex("\x1f".join((instruction, input_text.lower(),
                                         " ".join(output_text.lower().split()))))
        if digest in seen:
            continue
        seen.add(digest)
        records.append(DatasetRecord(
            id=content_id("record", {"instruction": instruction, "input": input_text,
                                     "output": output_text}),
            stage=golden.task,
            instruction=instruction,
            input=input_text,
            output=output_text,
            cot=render_cot(outcome),
            lineage={"golden_ref": golden.id, "candidate_ref": candidate.id,
                     "outcome_ref": outcome.outcome_id()},
            validation={"method": outcome.method, "verdict": outcome.verdict,
                        **({"k": outcome.k} if outcome.k else {})},
        ))

    jsonl_text = "".join(canonical_json(r.to_doc()) + "\n" for r in records)
    dataset_id = content_id("dataset", {"records": [r.id for r in records]})
    train, val = [], []
    for record in records:
        bucket = int(digest_hex(f"{seed}:{record.id}")[:8], 16) % 100
        (val if bucket < val_percent else train).append(record.id)
    manifest = {"dataset_id": dataset_id, "seed": seed,
                "n_records": len(records), "split": {"train": train, "val": val}}
    return DatasetFile(dataset_id, tuple(records), jsonl_text, manifest)


def render_cot(outcome: ValidationOutcome) -> str:
    """Template the evidence steps into a verifiable reasoning narrative."""
    lines = [f"Validation by {outcome.method}:"]
    for i, step in enumerate(outcome.evidence, start=1):
        summary = ", ".join(f"{k}={_brief(v)}" for k, v in sorted(step.result.items()))
        lines.append(f"Step {i}: {step.description} -> {summary}.")
    lines.append(f"Conclusion: candidate {outcome.verdict}.")
    return "\n".join(lines)


def _brief(value) -> str:
    text = json.dumps(value) if not isinstance(value, str) else value
    return text if len(text) <= 60 else text[:57] + "..."


class BridgeLedger:
    """Persisted synthesis state under the store root.

    Goldens and candidates are one file per id (candidate status updates
    rewrite in place); outcomes append to a serialized JSONL ledger, and
    expert-pending candidates survive restarts.
    """

    def __init__(self, store) -> None:
        self.root = store.root / "bridge"
        for sub in ("goldens", "candidates"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._outcomes_path = self.root / "outcomes.jsonl"

    def save_golden(self, golden: GoldenItem) -> None:
        path = self.root / "goldens" / f"{golden.id}.json"
        path.write_text(canonical_json(golden.to_doc()), encoding="utf-8")

    def save_candidate(self, candidate: Candidate) -> None:
        path = self.root / "candidates" / f"{candidate.id}.json"
        path.write_text(canonical_json(candidate.to_doc()), encoding="utf-8")

    def append_outcome(self, outcome: ValidationOutcome) -> None:
        with self._outcomes_path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(outcome.to_doc()) + "\n")

    def save_ticket(self, ticket: ExpertTicket) -> None:
        path = self.root / "candidates" / f"{ticket.candidate_ref}.ticket.json"
        path.write_text(canonical_json({"item_id": ticket.item_id,
                                        "candidate_ref": ticket.candidate_ref}),
                        encoding="utf-8")

    def load_tickets(self) -> list[ExpertTicket]:
        out = []
        for path in sorted(self.root.glob("candidates/*.ticket.json")):
            doc = json.loads(path.read_text())
            out.append(ExpertTicket(doc["item_id"], doc["candidate_ref"]))
        return out

    def load_all(self) -> tuple[dict[str, GoldenItem], dict[str, Candidate],
                                list[ValidationOutcome]]:
        goldens = {}
        for path in sorted(self.root.glob("goldens/*.json")):
            item = GoldenItem.from_doc(json.loads(path.read_text()))
            goldens[item.id] = item
        candidates = {}
        for path in sorted(self.root.glob("candidates/*.json")):
            if path.name.endswith(".ticket.json"):
                continue
            candidate = Candidate.from_doc(json.loads(path.read_text()))
            candidates[candidate.id] = candidate
        outcomes = []
        if self._outcomes_path.exists():
            with self._outcomes_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        outcomes.append(ValidationOutcome.from_doc(json.loads(line)))
        return goldens, candidates, outcomes


# --------------------------------------------------------------------------
# Precision evaluation and the filter simulator

def evaluate_precision(outcomes: list[ValidationOutcome]) -> FilterStats:
    """Confusion counts against manual ground-truth labels."""
    tp = fp = tn = fn = 0
    ks = set()
    for outcome in outcomes:
        if outcome.label not in ("GTP", "GTN"):
            raise AssertflowError(
                f"outcome for {outcome.candidate_ref} lacks a GTP/GTN label")
        if outcome.k is not None:
            ks.add(outcome.k)
        positive = outcome.verdict == "positive"
        if positive and outcome.label == "GTP":
            tp += 1
        elif positive and outcome.label == "GTN":
            fp += 1
        elif not positive and outcome.label == "GTN":
            tn += 1
        else:
            fn += 1
    k = ks.pop() if len(ks) == 1 else None
    return FilterStats.from_confusion(k, tp, fp, tn, fn)


def load_calibrated_filter_config() -> dict:
    """The shipped calibrated simulator configuration."""
    text = resources.files("assertflow.data").joinpath(
        "filter_error_model.json").read_text()
    return json.loads(text)


def simulate_filter(error_model: StochasticErrorModel, k_values: list[int],
                    n_items: int, gtp_fraction: float = DEFAULT_GTP_FRACTION,
                    seed: int = 0) -> list[FilterStats]:
    """Simulate unanimous k-agent filtering over one item population.

    The same items, hardness draws and per-check outcomes are reused
    across every k (checks are nested prefixes), so the curves are paired:
    false positives can only shrink and false negatives only grow as k
    increases.
    """
    if not k_values:
        raise ValueError("k_values must be non-empty")
    if n_items < 1:
        raise ValueError("n_items must be >= 1")
    max_k = max(k_values)
    rng = random.Random(seed)

    items = []
    for index in range(n_items):
        is_gtp = rng.random() < gtp_fraction
        hard = rng.random() < error_model.hard_fraction
        q = error_model.hard_error_prob if hard else error_model.easy_error_prob
        errs = tuple(rng.random() < q for _ in range(max_k))
        items.append((is_gtp, errs))

    stats = []
    for k in k_values:
        tp = fp = tn = fn = 0
        for is_gtp, errs in items:
            window = errs[:k]
            if is_gtp:
                # an error wrongly rejects a good item
                accepted = not any(window)
                tp += accepted
                fn += not accepted
            else:
                # an error wrongly accepts a bad item; unanimity needs all k wrong
                accepted = all(window)
                fp += accepted
                tn += not accepted
        stats.append(FilterStats.from_confusion(k, tp, fp, tn, fn))
    return stats
