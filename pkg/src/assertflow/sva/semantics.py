"""Three-valued evaluation of parsed assertions over finite sampled traces.

Match semantics: a sequence evaluated from attempt cycle ``i`` yields the
set of cycles at which a match can end, plus a pending flag that is true
when some match could still complete beyond the last trace cycle. Attempt
verdicts are derived from (matches, pending):

* sequence as property: PASS if a match ends in-trace, else UNDETERMINED
  if pending, else FAIL;
* implication: FAIL if the consequent fails at any antecedent match's
  attempt cycle, else UNDETERMINED if the antecedent is pending or any
  consequent attempt is undetermined, else PASS (vacuously when the
  antecedent never matches);
* ``not`` swaps PASS and FAIL; ``and`` / ``or`` combine with FAIL- and
  PASS-dominant Kleene rules.

Sampled-value defaults: the value before cycle 0 is 0, so at cycle 0
``$rose(x)`` equals ``x``, ``$fell(x)`` is 0, ``$stable(x)`` is ``!x``,
and ``$past(e, n)`` is 0 until ``n`` cycles of history exist.

The evaluator is pure over immutable inputs; any number of (ast, trace)
pairs may be evaluated concurrently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from assertflow.errors import UnknownSignalError
from assertflow.sva import ast as A


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    UNDETERMINED = "undetermined"

    @property
    def dominance(self) -> int:
        """FAIL > UNDETERMINED > PASS; used by the combination rules."""
        return _DOMINANCE[self]


_DOMINANCE = {Verdict.FAIL: 2, Verdict.UNDETERMINED: 1, Verdict.PASS: 0}

_NOT = {Verdict.PASS: Verdict.FAIL, Verdict.FAIL: Verdict.PASS,
        Verdict.UNDETERMINED: Verdict.UNDETERMINED}


def verdict_and(a: Verdict, b: Verdict) -> Verdict:
    return a if a.dominance >= b.dominance else b


def verdict_or(a: Verdict, b: Verdict) -> Verdict:
    return a if a.dominance <= b.dominance else b


def verdict_not(v: Verdict) -> Verdict:
    return _NOT[v]


@dataclass(frozen=True)
class Trace:
    """Cycle-sampled 1-bit signal values: cycles[c][signal_index]."""

    signals: tuple[str, ...]
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cycles) < 1:
            raise ValueError("trace must have at least one cycle")
        if len(set(self.signals)) != len(self.signals):
            raise ValueError("duplicate signal names in trace")
        width = len(self.signals)
        for row in self.cycles:
            if len(row) != width:
                raise ValueError(f"cycle row width {len(row)} != {width} signals")
            if any(v not in (0, 1) for v in row):
                raise ValueError("trace values must be 0 or 1")

    @property
    def length(self) -> int:
        return len(self.cycles)

    @classmethod
    def from_columns(cls, columns: dict[str, list[int]]) -> "Trace":
        names = tuple(columns)
        lengths = {len(v) for v in columns.values()}
        if len(lengths) != 1:
            raise ValueError("all signal columns must have equal length")
        length = lengths.pop()
        rows = tuple(tuple(columns[n][c] for n in names) for c in range(length))
        return cls(names, rows)

    def to_doc(self) -> dict:
        return {"signals": list(self.signals), "cycles": [list(r) for r in self.cycles]}

    @classmethod
    def from_doc(cls, doc: dict) -> "Trace":
        return cls(tuple(doc["signals"]), tuple(tuple(r) for r in doc["cycles"]))


@dataclass(frozen=True)
class AssertionResult:
    overall: Verdict  # PASS or FAIL; undetermined attempts do not fail the trace
    per_attempt: tuple[Verdict, ...]


def eval_attempt(ast: A.SvaAst | A.PropNode, trace: Trace, attempt_cycle: int) -> Verdict:
    """Verdict of one evaluation attempt starting at the given cycle."""
    prop = ast.property if isinstance(ast, A.SvaAst) else ast
    if not 0 <= attempt_cycle < trace.length:
        raise ValueError(f"attempt cycle {attempt_cycle} outside trace of length {trace.length}")
    return _Evaluator(prop, trace).attempt(prop, attempt_cycle)


def eval_assertion(ast: A.SvaAst | A.PropNode, trace: Trace) -> AssertionResult:
    """Evaluate an attempt at every trace cycle; FAIL-any / else PASS overall."""
    prop = ast.property if isinstance(ast, A.SvaAst) else ast
    ev = _Evaluator(prop, trace)
    verdicts = tuple(ev.attempt(prop, i) for i in range(trace.length))
    overall = Verdict.FAIL if Verdict.FAIL in verdicts else Verdict.PASS
    return AssertionResult(overall=overall, per_attempt=verdicts)


class _Evaluator:
    """Memoized bottom-up evaluator over one (property, trace) pair."""

    def __init__(self, prop: A.PropNode, trace: Trace) -> None:
        missing = [s for s in sorted(A.collect_signals(prop)) if s not in trace.signals]
        if missing:
            raise UnknownSignalError(missing[0])
        self.trace = trace
        self.length = trace.length
        self.index = {name: k for k, name in enumerate(trace.signals)}
        self._match_cache: dict[tuple[int, int], tuple[frozenset[int], bool]] = {}
        self._expr_cache: dict[tuple[int, int], bool] = {}

    # -- expressions (only called with 0 <= cycle < length) -----------------

    def signal(self, name: str, cycle: int) -> int:
        return self.trace.cycles[cycle][self.index[name]]

    def prev(self, name: str, cycle: int) -> int:
        return self.signal(name, cycle - 1) if cycle >= 1 else 0

    def expr(self, node: A.ExprNode, cycle: int) -> bool:
        key = (id(node), cycle)
        hit = self._expr_cache.get(key)
        if hit is not None:
            return hit
        value = self._expr(node, cycle)
        self._expr_cache[key] = value
        return value

    def _expr(self, node: A.ExprNode, cycle: int) -> bool:
        if isinstance(node, A.SignalRef):
            return bool(self.signal(node.name, cycle))
        if isinstance(node, A.Literal):
            return bool(node.value)
        if isinstance(node, A.NotExpr):
            return not self.expr(node.arg, cycle)
        if isinstance(node, A.AndExpr):
            return self.expr(node.left, cycle) and self.expr(node.right, cycle)
        if isinstance(node, A.OrExpr):
            return self.expr(node.left, cycle) or self.expr(node.right, cycle)
        if isinstance(node, A.EqExpr):
            return self.expr(node.left, cycle) == self.expr(node.right, cycle)
        if isinstance(node, A.NeqExpr):
            return self.expr(node.left, cycle) != self.expr(node.right, cycle)
        if isinstance(node, A.Rose):
            return bool(self.signal(node.signal, cycle)) and not self.prev(node.signal, cycle)
        if isinstance(node, A.Fell):
            return not self.signal(node.signal, cycle) and bool(self.prev(node.signal, cycle))
        if isinstance(node, A.Stable):
            return bool(self.signal(node.signal, cycle)) == bool(self.prev(node.signal, cycle))
        if isinstance(node, A.Past):
            if cycle < node.depth:
                return False
            return self.expr(node.arg, cycle - node.depth)
        raise TypeError(f"not an expression node: {node!r}")

    # -- sequences -----------------------------------------------------------

    def matches(self, seq: A.SeqNode, start: int) -> tuple[frozenset[int], bool]:
        """(set of in-trace end cycles, could a match end beyond the trace)."""
        key = (id(seq), start)
        hit = self._match_cache.get(key)
        if hit is not None:
            return hit
        result = self._matches(seq, start)
        self._match_cache[key] = result
        return result

    def _matches(self, seq: A.SeqNode, start: int) -> tuple[frozenset[int], bool]:
        if start >= self.length:
            # the whole window lies beyond the trace end
            return frozenset(), True
        if isinstance(seq, A.BoolSeq):
            if self.expr(seq.expr, start):
                return frozenset((start,)), False
            return frozenset(), False
        if isinstance(seq, A.DelaySeq):
            first_ends, pending = self.matches(seq.first, start)
            ends: set[int] = set()
            for j in first_ends:
                for n in range(seq.lo, seq.hi + 1):
                    sub_ends, sub_pending = self.matches(seq.second, j + n)
                    ends |= sub_ends
                    pending = pending or sub_pending
            return frozenset(ends), pending
        if isinstance(seq, A.RepeatSeq):
            ends: set[int] = set()
            pending = False
            for r in range(1, seq.hi + 1):
                cycle = start + r - 1
                if cycle >= self.length:
                    # all in-trace cycles held; a long enough run could
                    # finish past the end
                    pending = True
                    break
                if not self.expr(seq.expr, cycle):
                    break
                if r >= seq.lo:
                    ends.add(cycle)
            return frozenset(ends), pending
        raise TypeError(f"not a sequence node: {seq!r}")

    # -- properties ------------------------------------------------------------

    def attempt(self, prop: A.PropNode, cycle: int) -> Verdict:
        if cycle >= self.length:
            return Verdict.UNDETERMINED
        if isinstance(prop, A.SeqProp):
            ends, pending = self.matches(prop.seq, cycle)
            if ends:
                return Verdict.PASS
            return Verdict.UNDETERMINED if pending else Verdict.FAIL
        if isinstance(prop, A.Implication):
            ends, pending = self.matches(prop.antecedent, cycle)
            saw_undetermined = pending
            for j in sorted(ends):
                sub = self.attempt(prop.consequent, j if prop.overlap else j + 1)
                if sub is Verdict.FAIL:
                    return Verdict.FAIL
                if sub is Verdict.UNDETERMINED:
                    saw_undetermined = True
            return Verdict.UNDETERMINED if saw_undetermined else Verdict.PASS
        if isinstance(prop, A.NotProp):
            return verdict_not(self.attempt(prop.arg, cycle))
        if isinstance(prop, A.AndProp):
            return verdict_and(self.attempt(prop.left, cycle),
                               self.attempt(prop.right, cycle))
        if isinstance(prop, A.OrProp):
            return verdict_or(self.attempt(prop.left, cycle),
                              self.attempt(prop.right, cycle))
        raise TypeError(f"not a property node: {prop!r}")
