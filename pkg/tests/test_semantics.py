from __future__ import annotations

import pytest
from hypothesis import given, settings

import strategies
from oracle_semantics import assertion_verdicts
from assertflow.errors import UnknownSignalError
from assertflow.sva import Trace, Verdict, eval_assertion, eval_attempt, max_span, parse_assertion
from assertflow.sva import ast as A
from assertflow.sva.semantics import verdict_and, verdict_not, verdict_or


def parse(body: str) -> A.SvaAst:
    return parse_assertion(f"assert property (@(posedge clk) {body});")


def trace(**columns) -> Trace:
    return Trace.from_columns({k: list(v) for k, v in columns.items()})


class TestVerdictAlgebra:
    def test_dominance_order(self):
        assert Verdict.FAIL.dominance > Verdict.UNDETERMINED.dominance
        assert Verdict.UNDETERMINED.dominance > Verdict.PASS.dominance

    @pytest.mark.parametrize("a,b,expected", [
        (Verdict.PASS, Verdict.PASS, Verdict.PASS),
        (Verdict.PASS, Verdict.FAIL, Verdict.FAIL),
        (Verdict.UNDETERMINED, Verdict.PASS, Verdict.UNDETERMINED),
        (Verdict.UNDETERMINED, Verdict.FAIL, Verdict.FAIL),
    ])
    def test_and_is_fail_dominant(self, a, b, expected):
        assert verdict_and(a, b) is expected
        assert verdict_and(b, a) is expected

    def test_or_is_pass_dominant(self):
        assert verdict_or(Verdict.FAIL, Verdict.PASS) is Verdict.PASS
        assert verdict_or(Verdict.FAIL, Verdict.UNDETERMINED) is Verdict.UNDETERMINED

    def test_not_swaps_and_fixes_undetermined(self):
        assert verdict_not(Verdict.PASS) is Verdict.FAIL
        assert verdict_not(Verdict.FAIL) is Verdict.PASS
        assert verdict_not(Verdict.UNDETERMINED) is Verdict.UNDETERMINED


class TestAttemptExamples:
    def test_implication_antecedent_holds_consequent_false(self):
        assert eval_attempt(parse("a |-> b"), trace(a=[1], b=[0]), 0) is Verdict.FAIL

    def test_vacuous_pass(self):
        assert eval_attempt(parse("a |-> b"), trace(a=[0], b=[0]), 0) is Verdict.PASS

    def test_pending_match_is_undetermined(self):
        # the delay pushes the second operand past the trace end
        assert eval_attempt(parse("a ##1 b"), trace(a=[1], b=[0]), 0) \
            is Verdict.UNDETERMINED

    def test_attempt_bounds_checked(self):
        with pytest.raises(ValueError):
            eval_attempt(parse("a"), trace(a=[1]), 1)

    def test_unknown_signal_named(self):
        with pytest.raises(UnknownSignalError) as err:
            eval_attempt(parse("a |-> missing"), trace(a=[1]), 0)
        assert err.value.name == "missing"


class TestAssertionExamples:
    def test_delayed_consequent_pends_at_trace_end(self):
        # [DERIVED] oracle-checked: the attempt at the last cycle has its
        # consequent window beyond the end, so it stays undetermined
        result = eval_assertion(parse("req |-> ##1 ack"),
                                trace(req=[1, 0, 1], ack=[0, 1, 0]))
        assert [v.value for v in result.per_attempt] == \
            ["pass", "pass", "undetermined"]
        assert result.overall is Verdict.PASS

    def test_failing_attempt_fails_overall(self):
        result = eval_assertion(parse("req |-> ##1 ack"),
                                trace(req=[1, 0, 0], ack=[0, 0, 0]))
        assert result.per_attempt[0] is Verdict.FAIL
        assert result.overall is Verdict.FAIL

    def test_constant_true_passes_everywhere(self):
        result = eval_assertion(parse("1"), trace(a=[0, 1, 0, 1]))
        assert all(v is Verdict.PASS for v in result.per_attempt)

    def test_sampled_value_defaults_at_cycle_zero(self):
        # prior value is 0: $rose(x)@0 == x(0), $fell(x)@0 == 0,
        # $stable(x)@0 == (x(0) == 0), $past(e, n)@i<n == 0
        assert eval_attempt(parse("$rose(a)"), trace(a=[1]), 0) is Verdict.PASS
        assert eval_attempt(parse("$fell(a)"), trace(a=[1]), 0) is Verdict.FAIL
        assert eval_attempt(parse("$stable(a)"), trace(a=[0]), 0) is Verdict.PASS
        assert eval_attempt(parse("$stable(a)"), trace(a=[1]), 0) is Verdict.FAIL
        assert eval_attempt(parse("$past(a, 2)"), trace(a=[1, 1]), 1) is Verdict.FAIL

    def test_zero_delay_overlaps(self):
        result = eval_assertion(parse("a ##0 b"), trace(a=[1, 1], b=[1, 0]))
        assert result.per_attempt[0] is Verdict.PASS
        assert result.per_attempt[1] is Verdict.FAIL


class TestMaxSpan:
    @pytest.mark.parametrize("body,expected", [
        ("a |-> b", 1),
        ("a ##2 b", 3),  # [DERIVED] matches start at i and end at i+2
        ("a |=> b[*2]", 3),  # [DERIVED] antecedent at i, consequent i+1..i+2
        ("a", 1),
        ("a ##0 b", 1),
        ("a[*3]", 3),
        ("a |-> ##[1:3] b", 4),
        ("$past(a, 2) |-> b", 3),  # history depth extends the window
        ("$rose(a) |-> b", 2),
    ])
    def test_span(self, body, expected):
        assert max_span(parse(body)) == expected


class TestSemanticsProperties:
    @settings(max_examples=150, deadline=None)
    @given(strategies.asts(), strategies.traces(max_len=4))
    def test_matches_oracle(self, ast, tr):
        got = list(eval_assertion(ast, tr).per_attempt)
        assert got == assertion_verdicts(ast, tr)

    @settings(max_examples=150, deadline=None)
    @given(strategies.asts(), strategies.traces(max_len=4), strategies.traces(max_len=3))
    def test_extension_monotonicity(self, ast, tr, extension):
        # appending cycles may only resolve UNDETERMINED attempts
        before = eval_assertion(ast, tr).per_attempt
        extended = Trace(tr.signals, tr.cycles + extension.cycles)
        after = eval_assertion(ast, extended).per_attempt
        for i in range(tr.length):
            if before[i] is not Verdict.UNDETERMINED:
                assert after[i] is before[i]

    @settings(max_examples=150, deadline=None)
    @given(strategies.props(), strategies.traces(max_len=4))
    def test_not_duality(self, prop, tr):
        swap = {Verdict.PASS: Verdict.FAIL, Verdict.FAIL: Verdict.PASS,
                Verdict.UNDETERMINED: Verdict.UNDETERMINED}
        for i in range(tr.length):
            inner = eval_attempt(prop, tr, i)
            assert eval_attempt(A.NotProp(prop), tr, i) is swap[inner]

    @settings(max_examples=150, deadline=None)
    @given(strategies.seqs(), strategies.props(), strategies.traces(max_len=4))
    def test_nonoverlap_desugars_to_delayed_true(self, seq, prop, tr):
        # s |=> p  ==  s ##1 1 |-> p, attempt for attempt
        sugar = A.Implication(seq, False, prop)
        desugared = A.Implication(
            A.DelaySeq(seq, 1, 1, A.BoolSeq(A.Literal(1))), True, prop)
        for i in range(tr.length):
            assert eval_attempt(sugar, tr, i) is eval_attempt(desugared, tr, i)

    @settings(max_examples=60, deadline=None)
    @given(strategies.asts(), strategies.traces(max_len=4))
    def test_determinism(self, ast, tr):
        first = eval_assertion(ast, tr)
        second = eval_assertion(ast, tr)
        assert first == second
