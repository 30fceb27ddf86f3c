from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

import strategies
from assertflow.equiv import (
    TraceSuite,
    check_conformance,
    check_equivalence,
    enumerate_traces,
    load_bug_taxonomy,
)
from assertflow.errors import BudgetExceededError, UnknownSignalError
from assertflow.sva import Trace, Verdict, eval_assertion, parse_assertion


def parse(body: str):
    return parse_assertion(f"assert property (@(posedge clk) {body});")


class TestEnumeration:
    def test_one_signal_two_cycles(self):
        traces = list(enumerate_traces(("a",), 2))
        assert len(traces) == 4
        assert len({t.cycles for t in traces}) == 4

    def test_two_signals_three_cycles(self):
        assert sum(1 for _ in enumerate_traces(("a", "b"), 3)) == 64

    def test_budget_refusal(self):
        with pytest.raises(BudgetExceededError) as err:
            next(iter(enumerate_traces(("a", "b", "c", "d"), 8)))
        assert "sampled" in str(err.value)

    def test_order_is_deterministic(self):
        first = [t.cycles for t in enumerate_traces(("a", "b"), 2)]
        second = [t.cycles for t in enumerate_traces(("a", "b"), 2)]
        assert first == second
        assert first[0] == ((0, 0), (0, 0))
        assert first[1] == ((1, 0), (0, 0))  # bit 0 is signal 0 at cycle 0


class TestEquivalenceGroundTruths:
    def test_implication_equals_disjunction(self):
        result = check_equivalence(parse("a |-> b"), parse("(!a || b)"),
                                   signals=("a", "b"), bound=4)
        assert result.verdict == "equivalent"
        assert result.mode == "exhaustive"

    def test_delayed_consequent_differs(self):
        result = check_equivalence(parse("a |-> ##1 b"), parse("a |-> b"),
                                   signals=("a", "b"), bound=3)
        assert result.verdict == "inequivalent"
        cex = result.counterexample
        assert cex is not None
        # replay: the counterexample reproduces the differing verdicts
        va = eval_assertion(parse("a |-> ##1 b"), cex.trace).per_attempt[cex.attempt_cycle]
        vb = eval_assertion(parse("a |-> b"), cex.trace).per_attempt[cex.attempt_cycle]
        assert (va, vb) == (cex.verdict_a, cex.verdict_b)
        assert va is not vb

    def test_minimal_counterexample_in_canonical_order(self):
        result = check_equivalence(parse("a |-> ##1 b"), parse("a |-> b"),
                                   signals=("a", "b"), bound=3)
        # first differing trace: length 1, enumeration index 1 (a=1, b=0)
        assert result.counterexample.trace.cycles == ((1, 0),)
        assert result.traces_checked == 2

    @settings(max_examples=40, deadline=None)
    @given(strategies.asts())
    def test_reflexivity(self, ast):
        result = check_equivalence(ast, ast, signals=("a", "b"), bound=3)
        assert result.verdict == "equivalent"

    @settings(max_examples=25, deadline=None)
    @given(strategies.asts(), strategies.asts())
    def test_symmetry(self, ast_a, ast_b):
        lhs = check_equivalence(ast_a, ast_b, signals=("a", "b"), bound=3)
        rhs = check_equivalence(ast_b, ast_a, signals=("a", "b"), bound=3)
        assert lhs.verdict == rhs.verdict

    @settings(max_examples=15, deadline=None)
    @given(strategies.asts(), strategies.asts(), strategies.asts())
    def test_transitivity(self, ast_a, ast_b, ast_c):
        ab = check_equivalence(ast_a, ast_b, signals=("a", "b"), bound=3).verdict
        bc = check_equivalence(ast_b, ast_c, signals=("a", "b"), bound=3).verdict
        if ab == "equivalent" and bc == "equivalent":
            ac = check_equivalence(ast_a, ast_c, signals=("a", "b"), bound=3).verdict
            assert ac == "equivalent"

    def test_sampled_mode_finds_difference(self):
        result = check_equivalence(parse("a |-> ##1 b"), parse("a |-> b"),
                                   signals=("a", "b"), bound=3, mode="sampled",
                                   sample_n=500, seed=11)
        assert result.verdict == "inequivalent"
        assert result.mode == "sampled"

    def test_sampled_inconclusive_on_equivalent_pair(self):
        result = check_equivalence(parse("a |-> b"), parse("(!a || b)"),
                                   signals=("a", "b"), bound=3, mode="sampled",
                                   sample_n=300, seed=3)
        assert result.verdict == "inconclusive"

    @settings(max_examples=25, deadline=None)
    @given(strategies.asts(), strategies.asts())
    def test_sampling_soundness(self, ast_a, ast_b):
        # a sampled inequivalence is never contradicted by exhaustive mode
        sampled = check_equivalence(ast_a, ast_b, signals=("a", "b"), bound=3,
                                    mode="sampled", sample_n=200, seed=5)
        if sampled.verdict == "inequivalent":
            exhaustive = check_equivalence(ast_a, ast_b, signals=("a", "b"), bound=3)
            assert exhaustive.verdict == "inequivalent"

    def test_low_bound_warns(self):
        result = check_equivalence(parse("a |-> ##4 b"), parse("a |-> ##4 b"),
                                   signals=("a", "b"), bound=2)
        assert result.warnings

    def test_alphabet_defaults_to_union(self):
        result = check_equivalence(parse("a |-> b"), parse("c |-> b"), bound=2)
        assert result.verdict == "inequivalent"

    def test_unknown_signal_outside_explicit_alphabet(self):
        with pytest.raises(UnknownSignalError):
            check_equivalence(parse("a |-> b"), parse("a |-> c"), signals=("a", "b"))


class TestConformance:
    def test_taxonomy_shipped_with_required_entries(self):
        taxonomy = load_bug_taxonomy()
        assert len(taxonomy) == 16
        assert "protocol_violation" in taxonomy
        assert "illegal_branch" in taxonomy

    def test_golden_sva_detects_protocol_violation(self, toy_suite):
        ast = parse("ack |-> $past(req, 1)")
        result = check_conformance(ast, toy_suite)
        assert result.functional_ok
        assert "protocol_violation" in result.detected

    def test_constant_true_detects_nothing(self, toy_suite):
        result = check_conformance(parse("1"), toy_suite)
        assert result.functional_ok
        assert result.detected == frozenset()

    def test_constant_false_fails_golden_and_detects_nothing(self, toy_suite):
        result = check_conformance(parse("0"), toy_suite)
        assert not result.functional_ok
        assert result.detected == frozenset()
        assert result.failures

    def test_unknown_signal_rejected(self, toy_suite):
        with pytest.raises(UnknownSignalError):
            check_conformance(parse("bogus |-> ack"), toy_suite)

    def test_suite_round_trips_through_doc(self, toy_suite):
        doc = toy_suite.to_doc()
        again = TraceSuite.from_doc(json.loads(json.dumps(doc)))
        assert again == toy_suite

    def test_unknown_bug_type_rejected(self):
        with pytest.raises(ValueError):
            TraceSuite(design_ref="d", signals=("a",),
                       golden_traces=(Trace(("a",), ((0,),)),),
                       bug_traces=(("made_up_bug", Trace(("a",), ((1,),))),))
