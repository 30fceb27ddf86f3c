"""Bounded functional-equivalence and conformance checking.

Two assertions are bounded-equivalent over a signal alphabet and length
bound when their full three-valued per-attempt verdict vectors agree on
every trace of every length up to the bound. Comparing the vectors rather
than the overall verdicts is deliberately strict: it catches consequent
timing differences that the weak overall reading masks.

Enumeration order is canonical (lengths ascending, then the integer whose
bits fill the cycle-major value matrix), so the reported counterexample is
always the minimal one regardless of how callers partition the work.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator

from assertflow.errors import BudgetExceededError, UnknownSignalError
from assertflow.sva import ast as A
from assertflow.sva.semantics import Trace, Verdict, eval_assertion

DEFAULT_BUDGET_BITS = 24
DEFAULT_SAMPLE_N = 100_000
DEFAULT_BOUND_CAP = 6


def load_bug_taxonomy() -> tuple[str, ...]:
    """The configurable bug-type tag list shipped with the package."""
    text = resources.files("assertflow.data").joinpath("bug_taxonomy.json").read_text()
    return tuple(json.loads(text)["bug_types"])


@dataclass(frozen=True)
class TraceSuite:
    """Golden (must-pass) and bug-tagged (should-fail) traces for one design."""

    design_ref: str
    signals: tuple[str, ...]
    golden_traces: tuple[Trace, ...]
    bug_traces: tuple[tuple[str, Trace], ...]
    taxonomy: tuple[str, ...] = field(default_factory=load_bug_taxonomy)

    def __post_init__(self) -> None:
        for trace in self.golden_traces:
            if trace.signals != self.signals:
                raise ValueError("golden trace signal alphabet differs from suite")
        for bug_type, trace in self.bug_traces:
            if trace.signals != self.signals:
                raise ValueError("bug trace signal alphabet differs from suite")
            if bug_type not in self.taxonomy:
                raise ValueError(f"bug type {bug_type!r} not in the configured taxonomy")

    def to_doc(self) -> dict:
        return {
            "design_ref": self.design_ref,
            "signals": list(self.signals),
            "golden_traces": [{"cycles": [list(r) for r in t.cycles]} for t in self.golden_traces],
            "bug_traces": [{"bug_type": b, "cycles": [list(r) for r in t.cycles]}
                           for b, t in self.bug_traces],
        }

    @classmethod
    def from_doc(cls, doc: dict, taxonomy: tuple[str, ...] | None = None) -> "TraceSuite":
        signals = tuple(doc["signals"])
        golden = tuple(Trace(signals, tuple(tuple(r) for r in t["cycles"]))
                       for t in doc["golden_traces"])
        bugs = tuple((t["bug_type"], Trace(signals, tuple(tuple(r) for r in t["cycles"])))
                     for t in doc["bug_traces"])
        kwargs = {"taxonomy": taxonomy} if taxonomy is not None else {}
        return cls(doc["design_ref"], signals, golden, bugs, **kwargs)


@dataclass(frozen=True)
class Counterexample:
    trace: Trace
    attempt_cycle: int
    verdict_a: Verdict
    verdict_b: Verdict


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: str  # equivalent | inequivalent | inconclusive
    counterexample: Counterexample | None
    traces_checked: int
    mode: str  # exhaustive | sampled
    seed: int | None = None
    sample_n: int | None = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConformanceResult:
    functional_ok: bool
    detected: frozenset[str]
    failures: tuple[dict, ...]  # golden-trace failures with first failing attempt


def enumerate_traces(signals: tuple[str, ...] | list[str], length: int,
                     budget_bits: int = DEFAULT_BUDGET_BITS) -> Iterator[Trace]:
    """Yield all 2^(|signals| * length) traces in a fixed canonical order.

    Bit (cycle * n_signals + signal_index) of the enumeration counter gives
    the value of that signal at that cycle.
    """
    signals = tuple(signals)
    if not signals:
        raise ValueError("at least one signal is required")
    if length < 1:
        raise ValueError("trace length must be >= 1")
    bits = len(signals) * length
    if bits > budget_bits:
        raise BudgetExceededError(
            f"{len(signals)} signals x {length} cycles = {bits} bits exceeds the "
            f"exhaustive budget of {budget_bits}; use sampled mode instead")
    n_sig = len(signals)
    for k in range(1 << bits):
        rows = tuple(
            tuple((k >> (c * n_sig + s)) & 1 for s in range(n_sig))
            for c in range(length)
        )
        yield Trace(signals, rows)


def random_trace(signals: tuple[str, ...], length: int, rng: random.Random) -> Trace:
    rows = tuple(tuple(rng.randint(0, 1) for _ in signals) for _ in range(length))
    return Trace(tuple(signals), rows)


def _alphabet(ast_a, ast_b, signals) -> tuple[str, ...]:
    if signals:
        provided = tuple(signals)
        referenced = A.collect_signals(_prop(ast_a)) | A.collect_signals(_prop(ast_b))
        missing = sorted(referenced - set(provided))
        if missing:
            raise UnknownSignalError(missing[0])
        return provided
    union = sorted(A.collect_signals(_prop(ast_a)) | A.collect_signals(_prop(ast_b)))
    return tuple(union) if union else ("a",)


def _prop(ast) -> A.PropNode:
    return ast.property if isinstance(ast, A.SvaAst) else ast


def check_equivalence(ast_a, ast_b, signals=None, bound: int | None = None,
                      mode: str = "auto", sample_n: int = DEFAULT_SAMPLE_N,
                      seed: int = 0, budget_bits: int = DEFAULT_BUDGET_BITS,
                      ) -> EquivalenceResult:
    """Compare per-attempt verdict vectors over all (or sampled) traces.

    Exhaustive mode covers every trace of every length 1..bound and never
    returns inconclusive. Sampled mode draws seeded random traces and is
    inconclusive when no difference is found. ``auto`` picks exhaustive
    when the bound fits the budget.
    """
    alphabet = _alphabet(ast_a, ast_b, signals)
    span = max(A.max_span(_prop(ast_a)), A.max_span(_prop(ast_b)))
    if bound is None:
        bound = min(span + 2, DEFAULT_BOUND_CAP)
    warnings: list[str] = []
    if bound < span:
        warnings.append(
            f"bound {bound} is below the combined span {span}; "
            "differences beyond the bound will not be observed")

    bits = len(alphabet) * bound
    if mode == "auto":
        mode = "exhaustive" if bits <= budget_bits else "sampled"

    if mode == "exhaustive":
        checked = 0
        for length in range(1, bound + 1):
            for trace in enumerate_traces(alphabet, length, budget_bits):
                checked += 1
                cex = _first_difference(ast_a, ast_b, trace)
                if cex is not None:
                    _assert_replays(ast_a, ast_b, cex)
                    return EquivalenceResult("inequivalent", cex, checked, "exhaustive",
                                             warnings=tuple(warnings))
        return EquivalenceResult("equivalent", None, checked, "exhaustive",
                                 warnings=tuple(warnings))

    if mode == "sampled":
        rng = random.Random(seed)
        for k in range(sample_n):
            trace = random_trace(alphabet, rng.randint(1, bound), rng)
            cex = _first_difference(ast_a, ast_b, trace)
            if cex is not None:
                _assert_replays(ast_a, ast_b, cex)
                return EquivalenceResult("inequivalent", cex, k + 1, "sampled",
                                         seed=seed, sample_n=sample_n,
                                         warnings=tuple(warnings))
        return EquivalenceResult("inconclusive", None, sample_n, "sampled",
                                 seed=seed, sample_n=sample_n, warnings=tuple(warnings))

    raise ValueError(f"unknown mode {mode!r}")


def _first_difference(ast_a, ast_b, trace: Trace) -> Counterexample | None:
    va = eval_assertion(ast_a, trace).per_attempt
    vb = eval_assertion(ast_b, trace).per_attempt
    for i, (x, y) in enumerate(zip(va, vb)):
        if x is not y:
            return Counterexample(trace, i, x, y)
    return None


def _assert_replays(ast_a, ast_b, cex: Counterexample) -> None:
    # counterexample validity is part of the result contract, not just a test
    va = eval_assertion(ast_a, cex.trace).per_attempt[cex.attempt_cycle]
    vb = eval_assertion(ast_b, cex.trace).per_attempt[cex.attempt_cycle]
    if va is not cex.verdict_a or vb is not cex.verdict_b:  # pragma: no cover
        raise AssertionError("counterexample failed to replay")


def check_conformance(ast, suite: TraceSuite) -> ConformanceResult:
    """Must-pass goldens gate bug detection.

    An assertion that fails any golden trace is functionally wrong and is
    credited with detecting nothing, whatever its behavior on bug traces.
    """
    referenced = A.collect_signals(_prop(ast))
    missing = sorted(referenced - set(suite.signals))
    if missing:
        raise UnknownSignalError(missing[0])

    failures = []
    for idx, trace in enumerate(suite.golden_traces):
        result = eval_assertion(ast, trace)
        if result.overall is Verdict.FAIL:
            first_fail = next(i for i, v in enumerate(result.per_attempt)
                              if v is Verdict.FAIL)
            failures.append({"golden_index": idx, "attempt_cycle": first_fail})
    functional_ok = not failures

    detected: set[str] = set()
    if functional_ok:
        for bug_type, trace in suite.bug_traces:
            if eval_assertion(ast, trace).overall is Verdict.FAIL:
                detected.add(bug_type)
    return ConformanceResult(functional_ok, frozenset(detected), tuple(failures))
