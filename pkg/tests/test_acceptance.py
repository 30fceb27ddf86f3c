"""Acceptance criteria, one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager

import pytest

from oracle_semantics import assertion_verdicts
from assertflow import artifacts as art
from assertflow import bridge, metrics
from assertflow.agents import AgentRuntime, AgentSpec, ScriptedMockBackend, \
    StochasticErrorModel, StochasticMockBackend
from assertflow.equiv import check_equivalence, enumerate_traces
from assertflow.errors import UndefinedRateError
from assertflow.pipeline import run_pipeline
from assertflow.store import ArtifactStore
from assertflow.sva import check_syntax, eval_assertion, parse_assertion
from assertflow.sva.ast import format_assertion


@contextmanager
def criterion(name: str, budget_s: float):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - started
    assert elapsed <= budget_s, f"{name}: took {elapsed:.1f}s, budget {budget_s}s"
    print(f"[PASS] {name} ({elapsed:.1f}s)")


def test_filter_simulation_reproduction():
    with criterion("filter-simulation reproduction (k=1..5 rates and precision)", 60):
        cfg = bridge.load_calibrated_filter_config()
        model = StochasticErrorModel.from_doc(cfg["model"])
        stats = bridge.simulate_filter(model, [1, 2, 3, 4, 5], n_items=10_000,
                                       gtp_fraction=cfg["gtp_fraction"],
                                       seed=cfg["seed"])
        by_k = {s.k: s for s in stats}
        assert abs(by_k[1].fp_rate - 7.36) <= 1.0, by_k[1].fp_rate
        rates = [by_k[k].fp_rate for k in (1, 2, 3, 4, 5)]
        assert all(cur <= prev for prev, cur in zip(rates, rates[1:])), rates
        assert by_k[5].fp_rate <= 0.5, by_k[5].fp_rate
        assert abs(by_k[1].precision - 88.8) <= 2.0, by_k[1].precision
        assert by_k[5].precision >= 99.0, by_k[5].precision


def test_toy_pipeline_end_to_end_matches_frozen_report(tmp_path, toy_dir, toy_spec,
                                                       toy_pipeline_config, toy_runtime,
                                                       toy_suite):
    with criterion("toy-design end-to-end run reproduces the frozen report", 30):
        store = ArtifactStore(tmp_path / "store")
        run = run_pipeline(toy_spec, toy_pipeline_config, store, toy_runtime)
        assert run.status == "done"
        assert run.syntax_pass_rate == 100.0

        svas = [store.get(i) for i in run.stage_artifacts["svas"]]
        report = metrics.compute_report(svas, {"toy_fifo_controller": toy_suite},
                                        run_ref=run.run_id)
        expected = json.loads((toy_dir / "expected_report.json").read_text())
        assert report.n_generated == expected["n_generated"]
        assert report.spr == expected["spr"]
        assert report.fpr == expected["fpr"]
        assert report.function_coverage == expected["function_coverage"]
        assert report.bug_distribution == expected["bug_distribution"]
        design = report.per_design[0]
        assert design.n_syntax_ok == expected["n_syntax_ok"]
        assert design.n_functional == expected["n_functional"]


def test_semantics_oracle_equivalence(semantics_corpus):
    with criterion("production evaluator matches the independent reference", 120):
        assert len(semantics_corpus) >= 50
        mismatches = 0
        compared = 0
        for text in semantics_corpus:
            ast = parse_assertion(text)
            for length in range(1, 5):
                for trace in enumerate_traces(("a", "b"), length):
                    produced = list(eval_assertion(ast, trace).per_attempt)
                    reference = assertion_verdicts(ast, trace)
                    compared += len(produced)
                    if produced != reference:
                        mismatches += 1
        assert compared >= 50_000, compared
        assert mismatches == 0


def test_equivalence_checker_ground_truths():
    with criterion("equivalence ground truths with replay-verified counterexample", 60):
        implication = parse_assertion("assert property (@(posedge clk) a |-> b);")
        disjunction = parse_assertion("assert property (@(posedge clk) (!a || b));")
        delayed = parse_assertion("assert property (@(posedge clk) a |-> ##1 b);")

        same = check_equivalence(implication, disjunction, signals=("a", "b"), bound=4)
        assert same.verdict == "equivalent"

        differ = check_equivalence(delayed, implication, signals=("a", "b"), bound=4)
        assert differ.verdict == "inequivalent"
        cex = differ.counterexample
        assert cex is not None
        replay_a = eval_assertion(delayed, cex.trace).per_attempt[cex.attempt_cycle]
        replay_b = eval_assertion(implication, cex.trace).per_attempt[cex.attempt_cycle]
        assert (replay_a, replay_b) == (cex.verdict_a, cex.verdict_b)
        assert replay_a is not replay_b


def test_metrics_exactness():
    with criterion("metrics exactness (pass rate and precision arithmetic)", 10):
        assert metrics.pass_rate([True, True, False, True]) == 75.00
        with pytest.raises(UndefinedRateError):
            metrics.pass_rate([])
        stats = bridge.FilterStats.from_confusion(None, tp=9, fp=1, tn=0, fn=0)
        assert stats.precision == 90.00
        empty = bridge.FilterStats.from_confusion(None, tp=0, fp=0, tn=3, fn=2)
        assert empty.precision is None


def _reverse_outcome(seed: int, k: int):
    text = "assert property (@(posedge clk) a |-> ##1 b);"
    sva = art.assign_id(art.SvaAssertion(
        id="", source_text=text, ast=parse_assertion(text), syntax_ok=True))
    golden = bridge.ingest_golden([sva], "acceptance")[0]
    candidate = bridge.Candidate.create(
        golden, {"description": f"d{seed}", "signals": ["a", "b"], "trigger": "t",
                 "expected": "e", "timing": "tm"}, {"kind": "generated"})
    model = StochasticErrorModel(base_correct_prob=0.7, hard_fraction=0.25,
                                 hard_error_prob=0.8, seed=seed)
    agent = AgentSpec(name="rev", role_prompt="{checkpoint_json}{clock}",
                      backend=StochasticMockBackend(model=model))
    outcome = bridge.validate_reverse(sva, candidate, k, bridge.EquivCheckConfig(),
                                      agent, AgentRuntime())
    return sva, golden, candidate, outcome


def test_unanimity_and_purity_laws():
    with criterion("unanimity and purity laws over randomized populations", 120):
        # (a) reverse verdict is positive exactly when all k checks are equivalent
        for seed in range(24):
            k = 1 + seed % 4
            _, _, _, outcome = _reverse_outcome(seed, k)
            checks = [s.result["equivalence"] for s in outcome.evidence]
            assert len(checks) == k
            assert (outcome.verdict == "positive") == \
                all(c == "equivalent" for c in checks)

        # (b) on paired simulated populations FP never grows and FN never
        # shrinks as k increases
        for seed in (3, 17, 42, 97):
            model = StochasticErrorModel(base_correct_prob=0.9, hard_fraction=0.3,
                                         hard_error_prob=0.25, seed=0)
            stats = bridge.simulate_filter(model, [1, 2, 3, 4, 5], 2_000,
                                           gtp_fraction=0.6, seed=seed)
            for prev, cur in zip(stats, stats[1:]):
                assert cur.fp <= prev.fp
                assert cur.fn >= prev.fn

        # (c) every dataset record's recorded evidence replays to equivalent
        goldens, candidates, outcomes = {}, {}, []
        for seed in range(12):
            _, golden, candidate, outcome = _reverse_outcome(100 + seed, 2)
            bridge.apply_outcome(candidate, outcome)
            goldens[golden.id] = golden
            candidates[candidate.id] = candidate
            outcomes.append(outcome)
        dataset = bridge.build_dataset(outcomes, candidates, goldens)
        assert dataset.records, "populations produced no accepted records"
        by_candidate = {o.candidate_ref: o for o in outcomes}
        for record in dataset.records:
            outcome = by_candidate[record.lineage["candidate_ref"]]
            assert outcome.verdict == "positive"
            assert bridge.replay_reverse_evidence(outcome)


def test_parser_corpus(valid_corpus, invalid_corpus):
    with criterion("parser corpus: all valid entries round-trip, all invalid "
                   "positioned-rejected", 60):
        assert len(valid_corpus) >= 40
        for text in valid_corpus:
            first = parse_assertion(text)
            second = parse_assertion(format_assertion(first))
            assert second == first, text

        assert len(invalid_corpus) >= 20
        for entry in invalid_corpus:
            report = check_syntax(entry["text"])
            assert not report.ok, entry
            diagnostic = report.diagnostics[0]
            assert diagnostic.line >= 1 and diagnostic.column >= 1
            assert diagnostic.message


def test_resumable_pipeline_zero_repeat_invocations(tmp_path, toy_dir, toy_spec,
                                                    toy_pipeline_config, toy_runtime):
    with criterion("resumable pipeline performs zero repeat agent invocations", 30):
        store = ArtifactStore(tmp_path / "store")
        scenario = json.loads((toy_dir / "scenario.json").read_text())
        # simulate a crash between the checkpoints and svas stages
        broken = {key: value for key, value in scenario.items() if "/svas/" not in key}
        for stage_config in toy_pipeline_config.stages.values():
            agent = toy_pipeline_config.agents[stage_config.agent]
            object.__setattr__(agent, "backend", ScriptedMockBackend(scenarios=broken))
        crashed = run_pipeline(toy_spec, toy_pipeline_config, store, toy_runtime)
        assert crashed.status == "failed"
        invocations_after_crash = toy_runtime.invocation_count

        for stage_config in toy_pipeline_config.stages.values():
            agent = toy_pipeline_config.agents[stage_config.agent]
            object.__setattr__(agent, "backend", ScriptedMockBackend(scenarios=scenario))
        resumed = run_pipeline(toy_spec, toy_pipeline_config, store, toy_runtime,
                               run_id=crashed.run_id)
        assert resumed.status == "done"
        # only the sva-stage calls happened on resume; earlier stages were
        # not re-invoked
        assert toy_runtime.invocation_count - invocations_after_crash == \
            resumed.counts["svas"]

        final = toy_runtime.invocation_count
        run_pipeline(toy_spec, toy_pipeline_config, store, toy_runtime,
                     run_id=resumed.run_id)
        assert toy_runtime.invocation_count == final
