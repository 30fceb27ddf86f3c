from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assertflow import artifacts as art
from assertflow import bridge
from assertflow.agents import (
    AgentRuntime,
    AgentSpec,
    ScriptedMockBackend,
    StochasticErrorModel,
    StochasticMockBackend,
)
from assertflow.errors import AssertflowError, PendingOutcomesError
from assertflow.store import ReviewQueue
from assertflow.sva import parse_assertion


def golden_sva_artifact(text="assert property (@(posedge clk) req && !full |-> ##1 ack);"):
    return art.assign_id(art.SvaAssertion(
        id="", source_text=text, ast=parse_assertion(text), syntax_ok=True))


def golden_plan_artifact():
    return art.assign_id(art.VerificationPlan(
        id="", spec_ref="design_spec-0000000000000000",
        sections=(art.PlanSection("Handshake", "hs", ("`req` then `ack`",), ()),
                  art.PlanSection("Flags", "fl", ("`full` exclusive of `empty`",), ())),
        signal_table=(art.PortDecl("req", "in", 1), art.PortDecl("ack", "out", 1),
                      art.PortDecl("full", "out", 1), art.PortDecl("empty", "out", 1))))


def feature_payload(feature_id="F1", signals=("req", "ack"), section="Handshake"):
    return {"feature_id": feature_id, "title": f"title {feature_id}",
            "description": "desc", "category": "c", "signals": list(signals),
            "source_section": section}


def checkpoint_payload(signals=("req", "full", "ack")):
    return {"description": "granted requests acknowledged next cycle",
            "signals": list(signals), "trigger": "req while not full",
            "expected": "ack next cycle", "timing": "one cycle"}


def scripted_agent(scenarios, name="gen") -> AgentSpec:
    return AgentSpec(name=name, role_prompt="{golden_json}{gap_note}",
                     backend=ScriptedMockBackend(scenarios=scenarios))


def fenced(doc) -> str:
    return f"```json\n{json.dumps(doc)}\n```"


class TestIngestGolden:
    def test_sva_with_signals(self):
        artifact = golden_sva_artifact()
        items = bridge.ingest_golden([artifact], reviewer="rev-1")
        assert len(items) == 1
        item = items[0]
        assert item.task == "sva_to_checkpoint"
        assert item.payload["signals"] == ["ack", "full", "req"]
        assert item.provenance["marker"] == "expert_verified"
        assert item.provenance["reviewer"] == "rev-1"

    def test_plan_anchors_feature_synthesis(self):
        items = bridge.ingest_golden([golden_plan_artifact()], reviewer="rev-1")
        assert items[0].task == "plan_to_features"

    def test_feature_list_expands_per_feature(self):
        plan = golden_plan_artifact()
        features = art.assign_id(art.FeatureList(
            id="", plan_ref=plan.id,
            features=(art.Feature("F1", "a", "d", "c", ("req",), "Handshake"),
                      art.Feature("F2", "b", "d", "c", ("ack",), "Handshake"))))
        items = bridge.ingest_golden([features], reviewer="rev-1")
        assert [i.task for i in items] == ["feature_to_checkpoints"] * 2

    def test_missing_reviewer_rejected(self):
        with pytest.raises(AssertflowError):
            bridge.ingest_golden([golden_sva_artifact()], reviewer="")

    def test_unparsed_sva_rejected(self):
        broken = art.assign_id(art.SvaAssertion(id="", source_text="garbage"))
        with pytest.raises(AssertflowError):
            bridge.ingest_golden([broken], reviewer="rev-1")

    def test_golden_item_requires_provenance(self):
        with pytest.raises(ValueError):
            bridge.GoldenItem(id="g", task="sva_to_checkpoint", payload={},
                              provenance={"marker": "unverified"})


class TestGenerateCandidates:
    def test_mock_driven_features(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        doc = {"features": [feature_payload(f"F{i}") for i in range(1, 5)]}
        agent = scripted_agent({f"bridge/plan_to_features/{golden.id}": fenced(doc)})
        result = bridge.generate_candidates(golden, agent, AgentRuntime())
        assert len(result.candidates) == 4
        assert all(c.golden_ref == golden.id for c in result.candidates)
        assert result.raw_responses

    def test_one_to_one_task_arity(self):
        golden = bridge.ingest_golden([golden_sva_artifact()], "rev")[0]
        doc = {"checkpoints": [checkpoint_payload(), checkpoint_payload()]}
        agent = scripted_agent({f"bridge/sva_to_checkpoint/{golden.id}": fenced(doc)})
        result = bridge.generate_candidates(golden, agent, AgentRuntime())
        assert len(result.candidates) == 1
        assert any("1:1" in w for w in result.warnings)

    def test_invalid_item_dropped_others_kept(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        doc = {"features": [feature_payload("F1"),
                            {"feature_id": "F2", "title": ""}]}
        agent = scripted_agent({f"bridge/plan_to_features/{golden.id}": fenced(doc)})
        result = bridge.generate_candidates(golden, agent, AgentRuntime())
        assert len(result.candidates) == 1
        assert any("schema-invalid" in w for w in result.warnings)

    def test_unverified_golden_refused(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        doctored = bridge.GoldenItem.__new__(bridge.GoldenItem)
        object.__setattr__(doctored, "id", golden.id)
        object.__setattr__(doctored, "task", golden.task)
        object.__setattr__(doctored, "payload", golden.payload)
        object.__setattr__(doctored, "provenance", {"marker": "none"})
        with pytest.raises(AssertflowError) as err:
            bridge.generate_candidates(doctored, scripted_agent({}), AgentRuntime())
        assert "provenance" in str(err.value)

    def test_candidate_requires_golden_ref(self):
        with pytest.raises(ValueError):
            bridge.Candidate(id="c", golden_ref="", payload={}, origin={})


class TestCoverageGaps:
    def _golden_and_candidates(self, covered_signals, covered_sections):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        candidates = [
            bridge.Candidate.create(
                golden, feature_payload(f"F{i}", signals=[s], section=sec),
                {"kind": "generated"})
            for i, (s, sec) in enumerate(zip(covered_signals, covered_sections))]
        return golden, candidates

    def test_uncovered_signal_is_a_gap(self):
        golden, candidates = self._golden_and_candidates(
            ["req", "ack", "full"], ["Handshake", "Handshake", "Flags"])
        gaps = bridge.coverage_gaps(golden, candidates)
        assert bridge.Gap("signal", "empty") in gaps
        assert not any(g.kind == "section" for g in gaps)

    def test_full_coverage_no_gaps(self):
        golden, candidates = self._golden_and_candidates(
            ["req", "ack", "full", "empty"], ["Handshake", "Flags", "Flags", "Flags"])
        assert bridge.coverage_gaps(golden, candidates) == []

    def test_zero_candidates_everything_gaps(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        gaps = bridge.coverage_gaps(golden, [])
        assert len(gaps) == 4 + 2  # every signal and every section

    def test_feature_task_gaps_on_feature_signals(self):
        plan = golden_plan_artifact()
        features = art.assign_id(art.FeatureList(
            id="", plan_ref=plan.id,
            features=(art.Feature("F1", "t", "d", "c", ("req", "ack"), "Handshake"),)))
        golden = bridge.ingest_golden([features], "rev")[0]
        candidate = bridge.Candidate.create(
            golden, checkpoint_payload(signals=("req",)), {"kind": "generated"})
        gaps = bridge.coverage_gaps(golden, [candidate])
        assert gaps == [bridge.Gap("signal", "ack")]

    def test_foreign_candidate_rejected(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        other = bridge.ingest_golden([golden_sva_artifact()], "rev")[0]
        stray = bridge.Candidate.create(other, checkpoint_payload(), {"kind": "generated"})
        with pytest.raises(AssertflowError):
            bridge.coverage_gaps(golden, [stray])


class TestAugment:
    def _setup(self, gap_response_doc):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        base = bridge.CandidateSet(golden.id, tuple(
            bridge.Candidate.create(
                golden, feature_payload(f"F{i}", signals=[s], section=sec),
                {"kind": "generated"})
            for i, (s, sec) in enumerate(
                zip(["req", "ack", "full"], ["Handshake", "Handshake", "Flags"]))))
        scenarios = {f"bridge/plan_to_features/{golden.id}/gap/*": fenced(gap_response_doc)}
        return golden, base, scripted_agent(scenarios)

    def test_gap_filled_adds_candidate(self):
        golden, base, agent = self._setup(
            {"features": [feature_payload("F9", signals=["empty"], section="Flags")]})
        result = bridge.augment(golden, base, agent, AgentRuntime())
        assert len(result.candidates) == len(base.candidates) + 1
        added = result.candidates[-1]
        assert added.origin["kind"] == "augmented"
        assert added.origin["gap"] == {"kind": "signal", "value": "empty"}

    def test_duplicate_augmentation_deduplicates(self):
        golden, base, _ = self._setup({})
        duplicate = dict(base.candidates[0].payload)
        agent = scripted_agent({
            f"bridge/plan_to_features/{golden.id}/gap/*": fenced({"features": [duplicate]})})
        result = bridge.augment(golden, base, agent, AgentRuntime())
        assert len(result.candidates) == len(base.candidates)

    def test_no_gaps_zero_invocations(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        full = bridge.CandidateSet(golden.id, tuple(
            bridge.Candidate.create(
                golden, feature_payload(f"F{i}", signals=[s], section=sec),
                {"kind": "generated"})
            for i, (s, sec) in enumerate(zip(
                ["req", "ack", "full", "empty"],
                ["Handshake", "Flags", "Handshake", "Flags"]))))
        runtime = AgentRuntime()
        result = bridge.augment(golden, full, scripted_agent({}), runtime)
        assert runtime.invocation_count == 0
        assert result.candidates == bridge._dedup(full.candidates)

    def test_member_failure_partial_augmentation(self):
        golden, base, _ = self._setup({})
        # two gaps (empty signal + no section gap... construct: only respond to one)
        agent = scripted_agent({
            f"bridge/plan_to_features/{golden.id}/gap/signal:empty#0":
                fenced({"features": [feature_payload("F9", signals=["empty"],
                                                     section="Flags")]})})
        result = bridge.augment(golden, base, agent, AgentRuntime())
        assert any("degraded" in w or "unusable" in w for w in result.warnings) or \
            len(result.candidates) >= len(base.candidates)


class TestValidateReverse:
    def _candidate(self, golden):
        return bridge.Candidate.create(golden, checkpoint_payload(), {"kind": "generated"})

    def test_unanimous_echo_is_positive(self):
        sva = golden_sva_artifact()
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = self._candidate(golden)
        agent = scripted_agent({"bridge/reverse/*": sva.source_text}, name="rev")
        outcome = bridge.validate_reverse(sva, candidate, 3,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        assert outcome.verdict == "positive"
        assert outcome.method == "reverse_k"
        assert len(outcome.evidence) == 3
        assert all(s.result["equivalence"] == "equivalent" for s in outcome.evidence)

    def test_one_divergent_member_is_negative_with_counterexample(self):
        sva = golden_sva_artifact("assert property (@(posedge clk) a |-> b);")
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = self._candidate(golden)
        agent = scripted_agent({
            "bridge/reverse/*": sva.source_text,
            f"bridge/reverse/{candidate.id}#1":
                "assert property (@(posedge clk) a |-> ##1 b);"}, name="rev")
        outcome = bridge.validate_reverse(sva, candidate, 3,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        assert outcome.verdict == "negative"
        divergent = outcome.evidence[1]
        assert divergent.result["equivalence"] == "inequivalent"
        assert "counterexample" in divergent.result

    def test_syntax_failure_gates(self):
        sva = golden_sva_artifact()
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = self._candidate(golden)
        agent = scripted_agent({"bridge/reverse/*": "utter garbage"}, name="rev")
        outcome = bridge.validate_reverse(sva, candidate, 1,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        assert outcome.verdict == "negative"
        assert outcome.evidence[0].result["equivalence"] == "not_parsed"

    def test_infrastructure_failure_flagged(self):
        sva = golden_sva_artifact()
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = self._candidate(golden)
        agent = scripted_agent({}, name="rev")  # no scenario: invocation fails
        outcome = bridge.validate_reverse(sva, candidate, 2,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        assert outcome.verdict == "negative"
        assert outcome.infrastructure_failure

    def test_evidence_replays(self):
        sva = golden_sva_artifact()
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = self._candidate(golden)
        agent = scripted_agent({"bridge/reverse/*": sva.source_text}, name="rev")
        outcome = bridge.validate_reverse(sva, candidate, 2,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        assert bridge.replay_reverse_evidence(outcome)


class TestValidateBridged:
    def _candidate(self):
        sva = golden_sva_artifact()
        golden = bridge.ingest_golden([sva], "rev")[0]
        return bridge.Candidate.create(golden, checkpoint_payload(), {"kind": "generated"})

    def test_nontrivial_assertion_positive(self):
        candidate = self._candidate()
        agent = scripted_agent(
            {"bridge/bridged/*": "assert property (@(posedge clk) req |-> ##1 ack);"},
            name="bridge")
        outcome = bridge.validate_bridged(candidate, agent, bridge.SanityConfig(),
                                          AgentRuntime())
        assert outcome.verdict == "positive"
        result = outcome.evidence[0].result
        assert result["n_pass"] > 0 and result["n_fail"] > 0

    def test_trivially_true_negative(self):
        candidate = self._candidate()
        agent = scripted_agent({"bridge/bridged/*": "assert property (@(posedge clk) 1);"},
                               name="bridge")
        outcome = bridge.validate_bridged(candidate, agent, bridge.SanityConfig(),
                                          AgentRuntime())
        assert outcome.verdict == "negative"
        assert "trivially true" in outcome.evidence[0].result["reason"]

    def test_unparseable_negative(self):
        candidate = self._candidate()
        agent = scripted_agent({"bridge/bridged/*": "not an assertion"}, name="bridge")
        outcome = bridge.validate_bridged(candidate, agent, bridge.SanityConfig(),
                                          AgentRuntime())
        assert outcome.verdict == "negative"
        assert outcome.evidence[0].result["syntax_ok"] is False


class TestValidateDirect:
    def test_schema_path_immediate(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        candidate = bridge.Candidate.create(golden, feature_payload(), {"kind": "generated"})
        outcome = bridge.validate_direct(candidate, "schema")
        assert outcome.verdict == "positive"
        assert candidate.status == "accepted"

    def test_expert_path_state_machine(self, store):
        queue = ReviewQueue(store)
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        candidate = bridge.Candidate.create(golden, feature_payload(), {"kind": "generated"})
        ticket = bridge.validate_direct(candidate, "expert_queue", golden, queue)
        assert isinstance(ticket, bridge.ExpertTicket)
        assert candidate.status == "expert_pending"
        assert bridge.resolve_expert_ticket(ticket, candidate, queue) is None

        queue.post_verdict(ticket.item_id, "approve", "rev-2")
        outcome = bridge.resolve_expert_ticket(ticket, candidate, queue)
        assert outcome.verdict == "positive"
        assert outcome.method == "expert"
        assert candidate.status == "accepted"

    def test_expert_reject_with_reason(self, store):
        queue = ReviewQueue(store)
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        candidate = bridge.Candidate.create(golden, feature_payload(), {"kind": "generated"})
        ticket = bridge.validate_direct(candidate, "expert_queue", golden, queue)
        queue.post_verdict(ticket.item_id, "reject", "rev-2", reason="wrong signals")
        outcome = bridge.resolve_expert_ticket(ticket, candidate, queue)
        assert outcome.verdict == "negative"
        assert candidate.status == "rejected"
        assert candidate.rejection_reason == "wrong signals"

    def test_status_transitions_monotone(self):
        golden = bridge.ingest_golden([golden_plan_artifact()], "rev")[0]
        candidate = bridge.Candidate.create(golden, feature_payload(), {"kind": "generated"})
        candidate.transition("accepted")
        with pytest.raises(ValueError):
            candidate.transition("pending")
        with pytest.raises(ValueError):
            candidate.transition("rejected")


class TestDataset:
    def _accepted_outcome(self, text="assert property (@(posedge clk) a |-> b);"):
        sva = golden_sva_artifact(text)
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = bridge.Candidate.create(golden, checkpoint_payload(), {"kind": "generated"})
        agent = scripted_agent({"bridge/reverse/*": sva.source_text}, name="rev")
        outcome = bridge.validate_reverse(sva, candidate, 2,
                                          bridge.EquivCheckConfig(), agent, AgentRuntime())
        bridge.apply_outcome(candidate, outcome)
        return golden, candidate, outcome

    def test_only_accepted_become_records(self):
        golden, candidate, outcome = self._accepted_outcome()
        rejected = bridge.Candidate.create(golden, checkpoint_payload(("req",)),
                                           {"kind": "generated"})
        rejected.transition("rejected", reason="nope")
        negative = bridge.ValidationOutcome(rejected.id, "direct", "negative", ())
        dataset = bridge.build_dataset(
            [outcome, negative],
            {candidate.id: candidate, rejected.id: rejected},
            {golden.id: golden})
        assert len(dataset.records) == 1
        record = dataset.records[0]
        assert record.stage == "sva_to_checkpoint"
        assert record.cot
        assert record.validation["method"] == "reverse_k"

    def test_pending_refused_with_names(self):
        golden, candidate, outcome = self._accepted_outcome()
        waiting = bridge.Candidate.create(golden, checkpoint_payload(("ack",)),
                                          {"kind": "generated"})
        waiting.transition("expert_pending")
        with pytest.raises(PendingOutcomesError) as err:
            bridge.build_dataset([outcome], {candidate.id: candidate,
                                             waiting.id: waiting}, {golden.id: golden})
        assert waiting.id in err.value.pending

    def test_duplicate_payloads_one_record(self):
        golden, candidate, outcome = self._accepted_outcome()
        twin_payload = {k: (v.upper() if isinstance(v, str) else v)
                        for k, v in candidate.payload.items()}
        twin = bridge.Candidate.create(golden, twin_payload, {"kind": "generated"})
        twin.transition("accepted")
        twin_outcome = bridge.ValidationOutcome(twin.id, "direct", "positive", ())
        dataset = bridge.build_dataset(
            [outcome, twin_outcome],
            {candidate.id: candidate, twin.id: twin}, {golden.id: golden})
        assert len(dataset.records) == 1

    def test_split_deterministic_under_seed(self):
        golden, candidate, outcome = self._accepted_outcome()
        build = lambda: bridge.build_dataset(  # noqa: E731
            [outcome], {candidate.id: candidate}, {golden.id: golden}, seed=42)
        assert build().manifest == build().manifest
        assert build().dataset_id == build().dataset_id

    def test_jsonl_is_one_record_per_line(self):
        golden, candidate, outcome = self._accepted_outcome()
        dataset = bridge.build_dataset([outcome], {candidate.id: candidate},
                                       {golden.id: golden})
        lines = [ln for ln in dataset.jsonl_text.splitlines() if ln]
        assert len(lines) == 1
        assert json.loads(lines[0])["id"] == dataset.records[0].id


class TestPrecision:
    def _outcome(self, verdict, label):
        return bridge.ValidationOutcome(f"c-{verdict}-{label}-{id(object())}",
                                        "direct", verdict, (), label=label)

    def test_arithmetic(self):
        outcomes = ([self._outcome("positive", "GTP") for _ in range(9)]
                    + [self._outcome("positive", "GTN")]
                    + [self._outcome("negative", "GTN") for _ in range(10)])
        stats = bridge.evaluate_precision(outcomes)
        assert (stats.tp, stats.fp, stats.tn, stats.fn) == (9, 1, 10, 0)
        assert stats.precision == 90.0

    def test_no_false_positives(self):
        outcomes = [self._outcome("positive", "GTP") for _ in range(5)]
        assert bridge.evaluate_precision(outcomes).precision == 100.0

    def test_undefined_precision_not_zero(self):
        outcomes = [self._outcome("negative", "GTN"), self._outcome("negative", "GTP")]
        stats = bridge.evaluate_precision(outcomes)
        assert stats.precision is None

    def test_unlabeled_refused(self):
        with pytest.raises(AssertflowError):
            bridge.evaluate_precision([bridge.ValidationOutcome("c", "direct",
                                                                "positive", ())])


class TestSimulateFilter:
    def test_zero_error_model(self):
        model = StochasticErrorModel(base_correct_prob=1.0, hard_fraction=0.0,
                                     hard_error_prob=0.0)
        for stats in bridge.simulate_filter(model, [1, 3, 5], 500, 0.8, seed=1):
            assert stats.fp_rate == 0.0
            assert stats.precision == 100.0
            assert stats.fn == 0

    def test_calibrated_fp_rate_near_target(self):
        cfg = bridge.load_calibrated_filter_config()
        model = StochasticErrorModel.from_doc(cfg["model"])
        stats = bridge.simulate_filter(model, [1], 10_000, cfg["gtp_fraction"],
                                       cfg["seed"])[0]
        assert abs(stats.fp_rate - 7.36) <= 1.0

    def test_deterministic_under_seed(self):
        cfg = bridge.load_calibrated_filter_config()
        model = StochasticErrorModel.from_doc(cfg["model"])
        first = bridge.simulate_filter(model, [1, 2], 1000, 0.5, seed=9)
        second = bridge.simulate_filter(model, [1, 2], 1000, 0.5, seed=9)
        assert [s.to_doc() for s in first] == [s.to_doc() for s in second]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.05, 0.95), st.floats(0.0, 0.5),
           st.floats(0.1, 1.0))
    def test_fp_monotone_fn_antitone_in_k(self, seed, gtp_fraction, hard_fraction,
                                          hard_error_prob):
        marginal = hard_fraction * hard_error_prob + (1 - hard_fraction) * 0.05
        model = StochasticErrorModel(base_correct_prob=1 - marginal,
                                     hard_fraction=hard_fraction,
                                     hard_error_prob=hard_error_prob, seed=0)
        stats = bridge.simulate_filter(model, [1, 2, 3, 4, 5], 400, gtp_fraction, seed)
        for prev, cur in zip(stats, stats[1:]):
            assert cur.fp <= prev.fp
            assert cur.fn >= prev.fn

    def test_counts_sum_to_population(self):
        cfg = bridge.load_calibrated_filter_config()
        model = StochasticErrorModel.from_doc(cfg["model"])
        for stats in bridge.simulate_filter(model, [1, 5], 777, 0.4, seed=3):
            assert stats.tp + stats.fp + stats.tn + stats.fn == 777


class TestUnanimityLaw:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 1_000_000))
    def test_reverse_verdict_iff_all_equivalent(self, k, seed):
        # randomized population: stochastic reverse agents over a real golden
        sva = golden_sva_artifact("assert property (@(posedge clk) a |-> ##1 b);")
        golden = bridge.ingest_golden([sva], "rev")[0]
        candidate = bridge.Candidate.create(golden, checkpoint_payload(("a", "b")),
                                            {"kind": "generated"})
        model = StochasticErrorModel(base_correct_prob=0.6, hard_fraction=0.3,
                                     hard_error_prob=0.95, seed=seed)
        agent = AgentSpec(name="rev", role_prompt="{checkpoint_json}{clock}",
                          backend=StochasticMockBackend(model=model))
        outcome = bridge.validate_reverse(sva, candidate, k,
                                          bridge.EquivCheckConfig(), agent,
                                          AgentRuntime())
        checks = [s.result["equivalence"] for s in outcome.evidence]
        assert len(checks) == k
        assert (outcome.verdict == "positive") == all(c == "equivalent" for c in checks)
