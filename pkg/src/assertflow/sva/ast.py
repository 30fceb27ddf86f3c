"""AST node types for the supported SVA subset.

Three layers, mirroring the concrete grammar:

* expressions -- combinational booleans over 1-bit signals, sampled-value
  functions ($rose/$fell/$stable/$past);
* sequences -- expressions joined by bounded delays ``##n`` / ``##[m:n]``
  and bounded consecutive repetition ``[*m:n]``;
* properties -- sequences, implications ``|->`` / ``|=>``, and the
  property combinators ``not`` / ``and`` / ``or``.

All nodes are frozen dataclasses: structural equality is used for the
print/parse round-trip contract and instances are safe to share across
workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


# --------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class SignalRef:
    name: str


@dataclass(frozen=True)
class Literal:
    value: int  # 0 or 1

    def __post_init__(self) -> None:
        if self.value not in (0, 1):
            raise ValueError(f"literal must be 0 or 1, got {self.value}")


@dataclass(frozen=True)
class NotExpr:
    arg: "ExprNode"


@dataclass(frozen=True)
class AndExpr:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class OrExpr:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class EqExpr:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class NeqExpr:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Rose:
    signal: str


@dataclass(frozen=True)
class Fell:
    signal: str


@dataclass(frozen=True)
class Stable:
    signal: str


@dataclass(frozen=True)
class Past:
    arg: "ExprNode"
    depth: int  # >= 1

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("$past depth must be >= 1")


ExprNode = Union[SignalRef, Literal, NotExpr, AndExpr, OrExpr, EqExpr, NeqExpr,
                 Rose, Fell, Stable, Past]


# --------------------------------------------------------------------------
# Sequences

@dataclass(frozen=True)
class BoolSeq:
    expr: ExprNode


@dataclass(frozen=True)
class DelaySeq:
    first: "SeqNode"
    lo: int  # >= 0
    hi: int  # >= lo; ##0 means the second sequence starts on the cycle the
    #          first one ended (overlap)
    second: "SeqNode"

    def __post_init__(self) -> None:
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError(f"delay bounds must satisfy 0 <= lo <= hi, got [{self.lo}:{self.hi}]")


@dataclass(frozen=True)
class RepeatSeq:
    expr: ExprNode
    lo: int  # >= 1
    hi: int  # >= lo

    def __post_init__(self) -> None:
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"repetition bounds must satisfy 1 <= lo <= hi, got [*{self.lo}:{self.hi}]")


SeqNode = Union[BoolSeq, DelaySeq, RepeatSeq]


# --------------------------------------------------------------------------
# Properties

@dataclass(frozen=True)
class SeqProp:
    seq: SeqNode


@dataclass(frozen=True)
class Implication:
    antecedent: SeqNode
    overlap: bool  # True for |->, False for |=>
    consequent: "PropNode"


@dataclass(frozen=True)
class NotProp:
    arg: "PropNode"


@dataclass(frozen=True)
class AndProp:
    left: "PropNode"
    right: "PropNode"


@dataclass(frozen=True)
class OrProp:
    left: "PropNode"
    right: "PropNode"


PropNode = Union[SeqProp, Implication, NotProp, AndProp, OrProp]


@dataclass(frozen=True)
class SvaAst:
    """A parsed assertion: single implicit clock plus a property tree."""

    clock_event: str  # e.g. "posedge clk"; recorded, semantically implicit
    property: PropNode
    label: str | None = None

    @property
    def clock_signal(self) -> str:
        return self.clock_event.split()[-1]


# --------------------------------------------------------------------------
# Structural queries

def collect_signals(node) -> frozenset[str]:
    """All signal names referenced anywhere in an AST (clock excluded)."""
    out: set[str] = set()
    _collect(node, out)
    return frozenset(out)


def _collect(node, out: set[str]) -> None:
    if isinstance(node, SvaAst):
        _collect(node.property, out)
    elif isinstance(node, SignalRef):
        out.add(node.name)
    elif isinstance(node, (Rose, Fell, Stable)):
        out.add(node.signal)
    elif isinstance(node, Literal):
        pass
    elif isinstance(node, (NotExpr, Past)):
        _collect(node.arg, out)
    elif isinstance(node, (AndExpr, OrExpr, EqExpr, NeqExpr)):
        _collect(node.left, out)
        _collect(node.right, out)
    elif isinstance(node, BoolSeq):
        _collect(node.expr, out)
    elif isinstance(node, DelaySeq):
        _collect(node.first, out)
        _collect(node.second, out)
    elif isinstance(node, RepeatSeq):
        _collect(node.expr, out)
    elif isinstance(node, SeqProp):
        _collect(node.seq, out)
    elif isinstance(node, Implication):
        _collect(node.antecedent, out)
        _collect(node.consequent, out)
    elif isinstance(node, NotProp):
        _collect(node.arg, out)
    elif isinstance(node, (AndProp, OrProp)):
        _collect(node.left, out)
        _collect(node.right, out)
    else:
        raise TypeError(f"not an AST node: {node!r}")


def max_span(ast: SvaAst | PropNode) -> int:
    """Maximum number of cycles a match or refutation can involve.

    Computed as the largest end offset any match can reach from the
    attempt cycle, plus one, plus the deepest sampled-value history the
    expressions require. Used to size trace bounds for equivalence
    checking.
    """
    prop = ast.property if isinstance(ast, SvaAst) else ast
    return _end_offset(prop) + 1 + _history_depth(prop)


def _end_offset(node) -> int:
    if isinstance(node, BoolSeq):
        return 0
    if isinstance(node, DelaySeq):
        return _end_offset(node.first) + node.hi + _end_offset(node.second)
    if isinstance(node, RepeatSeq):
        return node.hi - 1
    if isinstance(node, SeqProp):
        return _end_offset(node.seq)
    if isinstance(node, Implication):
        shift = 0 if node.overlap else 1
        return _end_offset(node.antecedent) + shift + _end_offset(node.consequent)
    if isinstance(node, NotProp):
        return _end_offset(node.arg)
    if isinstance(node, (AndProp, OrProp)):
        return max(_end_offset(node.left), _end_offset(node.right))
    raise TypeError(f"not a sequence or property node: {node!r}")


def _history_depth(node) -> int:
    if isinstance(node, (SignalRef, Literal)):
        return 0
    if isinstance(node, (Rose, Fell, Stable)):
        return 1
    if isinstance(node, Past):
        return node.depth + _history_depth(node.arg)
    if isinstance(node, NotExpr):
        return _history_depth(node.arg)
    if isinstance(node, (AndExpr, OrExpr, EqExpr, NeqExpr)):
        return max(_history_depth(node.left), _history_depth(node.right))
    if isinstance(node, BoolSeq):
        return _history_depth(node.expr)
    if isinstance(node, DelaySeq):
        return max(_history_depth(node.first), _history_depth(node.second))
    if isinstance(node, RepeatSeq):
        return _history_depth(node.expr)
    if isinstance(node, SeqProp):
        return _history_depth(node.seq)
    if isinstance(node, Implication):
        return max(_history_depth(node.antecedent), _history_depth(node.consequent))
    if isinstance(node, NotProp):
        return _history_depth(node.arg)
    if isinstance(node, (AndProp, OrProp)):
        return max(_history_depth(node.left), _history_depth(node.right))
    raise TypeError(f"not an AST node: {node!r}")


# --------------------------------------------------------------------------
# Pretty printing (canonical text; parse(format(ast)) is structurally stable)

_EXPR_OR, _EXPR_AND, _EXPR_EQ, _EXPR_UNARY, _EXPR_PRIMARY = range(5)


def format_assertion(ast: SvaAst) -> str:
    label = f"{ast.label}: " if ast.label else ""
    return f"{label}assert property (@({ast.clock_event}) {format_property(ast.property)});"


def format_property(node: PropNode) -> str:
    if isinstance(node, Implication):
        op = "|->" if node.overlap else "|=>"
        return f"{format_sequence(node.antecedent)} {op} {format_property(node.consequent)}"
    return _fmt_prop_or(node)


def _fmt_prop_or(node) -> str:
    if isinstance(node, OrProp):
        return f"{_fmt_prop_or(node.left)} or {_fmt_prop_and(node.right)}"
    return _fmt_prop_and(node)


def _fmt_prop_and(node) -> str:
    if isinstance(node, AndProp):
        return f"{_fmt_prop_and(node.left)} and {_fmt_prop_not(node.right)}"
    return _fmt_prop_not(node)


def _fmt_prop_not(node) -> str:
    if isinstance(node, NotProp):
        return f"not {_fmt_prop_not(node.arg)}"
    if isinstance(node, SeqProp):
        return format_sequence(node.seq)
    # implication or a lower-precedence combinator in operand position
    return f"({format_property(node)})"


def format_sequence(node: SeqNode) -> str:
    if isinstance(node, DelaySeq):
        bounds = f"##{node.lo}" if node.lo == node.hi else f"##[{node.lo}:{node.hi}]"
        right = format_sequence(node.second)
        if isinstance(node.second, DelaySeq):
            right = f"({right})"  # delays associate left; keep right nesting explicit
        if node.first == BoolSeq(Literal(1)):
            return f"{bounds} {right}"  # idiomatic leading delay
        left = format_sequence(node.first)
        if isinstance(node.first, RepeatSeq):
            left = f"({left})"
        return f"{left} {bounds} {right}"
    if isinstance(node, RepeatSeq):
        bounds = f"[*{node.lo}]" if node.lo == node.hi else f"[*{node.lo}:{node.hi}]"
        inner = format_expr(node.expr)
        if not isinstance(node.expr, (SignalRef, Literal, Rose, Fell, Stable, Past, NotExpr)):
            inner = f"({inner})"
        return f"{inner}{bounds}"
    return format_expr(node.expr)


def format_expr(node: ExprNode, level: int = _EXPR_OR) -> str:
    text, own = _fmt_expr(node)
    return f"({text})" if own < level else text


def _fmt_expr(node) -> tuple[str, int]:
    if isinstance(node, OrExpr):
        return (f"{format_expr(node.left, _EXPR_OR)} || {format_expr(node.right, _EXPR_AND)}",
                _EXPR_OR)
    if isinstance(node, AndExpr):
        return (f"{format_expr(node.left, _EXPR_AND)} && {format_expr(node.right, _EXPR_EQ)}",
                _EXPR_AND)
    if isinstance(node, (EqExpr, NeqExpr)):
        op = "==" if isinstance(node, EqExpr) else "!="
        return (f"{format_expr(node.left, _EXPR_EQ)} {op} {format_expr(node.right, _EXPR_UNARY)}",
                _EXPR_EQ)
    if isinstance(node, NotExpr):
        return f"!{format_expr(node.arg, _EXPR_UNARY)}", _EXPR_UNARY
    if isinstance(node, SignalRef):
        return node.name, _EXPR_PRIMARY
    if isinstance(node, Literal):
        return str(node.value), _EXPR_PRIMARY
    if isinstance(node, Rose):
        return f"$rose({node.signal})", _EXPR_PRIMARY
    if isinstance(node, Fell):
        return f"$fell({node.signal})", _EXPR_PRIMARY
    if isinstance(node, Stable):
        return f"$stable({node.signal})", _EXPR_PRIMARY
    if isinstance(node, Past):
        return f"$past({format_expr(node.arg)}, {node.depth})", _EXPR_PRIMARY
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# JSON tree form (used inside artifact documents)

def ast_to_doc(ast: SvaAst) -> dict:
    return {
        "clock_event": ast.clock_event,
        "label": ast.label,
        "property": _node_to_doc(ast.property),
    }


def _node_to_doc(node) -> dict:
    if isinstance(node, SignalRef):
        return {"t": "signal", "name": node.name}
    if isinstance(node, Literal):
        return {"t": "lit", "value": node.value}
    if isinstance(node, NotExpr):
        return {"t": "not", "arg": _node_to_doc(node.arg)}
    if isinstance(node, (AndExpr, OrExpr, EqExpr, NeqExpr)):
        tag = {AndExpr: "and", OrExpr: "or", EqExpr: "eq", NeqExpr: "neq"}[type(node)]
        return {"t": tag, "left": _node_to_doc(node.left), "right": _node_to_doc(node.right)}
    if isinstance(node, Rose):
        return {"t": "rose", "signal": node.signal}
    if isinstance(node, Fell):
        return {"t": "fell", "signal": node.signal}
    if isinstance(node, Stable):
        return {"t": "stable", "signal": node.signal}
    if isinstance(node, Past):
        return {"t": "past", "arg": _node_to_doc(node.arg), "depth": node.depth}
    if isinstance(node, BoolSeq):
        return {"t": "bool_seq", "expr": _node_to_doc(node.expr)}
    if isinstance(node, DelaySeq):
        return {"t": "delay", "first": _node_to_doc(node.first), "lo": node.lo,
                "hi": node.hi, "second": _node_to_doc(node.second)}
    if isinstance(node, RepeatSeq):
        return {"t": "repeat", "expr": _node_to_doc(node.expr), "lo": node.lo, "hi": node.hi}
    if isinstance(node, SeqProp):
        return {"t": "seq_prop", "seq": _node_to_doc(node.seq)}
    if isinstance(node, Implication):
        return {"t": "impl", "antecedent": _node_to_doc(node.antecedent),
                "overlap": node.overlap, "consequent": _node_to_doc(node.consequent)}
    if isinstance(node, NotProp):
        return {"t": "not_prop", "arg": _node_to_doc(node.arg)}
    if isinstance(node, (AndProp, OrProp)):
        tag = "and_prop" if isinstance(node, AndProp) else "or_prop"
        return {"t": tag, "left": _node_to_doc(node.left), "right": _node_to_doc(node.right)}
    raise TypeError(f"not an AST node: {node!r}")


def ast_from_doc(doc: dict) -> SvaAst:
    return SvaAst(
        clock_event=doc["clock_event"],
        property=_node_from_doc(doc["property"]),
        label=doc.get("label"),
    )


def _node_from_doc(doc: dict):
    t = doc["t"]
    if t == "signal":
        return SignalRef(doc["name"])
    if t == "lit":
        return Literal(doc["value"])
    if t == "not":
        return NotExpr(_node_from_doc(doc["arg"]))
    if t in ("and", "or", "eq", "neq"):
        cls = {"and": AndExpr, "or": OrExpr, "eq": EqExpr, "neq": NeqExpr}[t]
        return cls(_node_from_doc(doc["left"]), _node_from_doc(doc["right"]))
    if t == "rose":
        return Rose(doc["signal"])
    if t == "fell":
        return Fell(doc["signal"])
    if t == "stable":
        return Stable(doc["signal"])
    if t == "past":
        return Past(_node_from_doc(doc["arg"]), doc["depth"])
    if t == "bool_seq":
        return BoolSeq(_node_from_doc(doc["expr"]))
    if t == "delay":
        return DelaySeq(_node_from_doc(doc["first"]), doc["lo"], doc["hi"],
                        _node_from_doc(doc["second"]))
    if t == "repeat":
        return RepeatSeq(_node_from_doc(doc["expr"]), doc["lo"], doc["hi"])
    if t == "seq_prop":
        return SeqProp(_node_from_doc(doc["seq"]))
    if t == "impl":
        return Implication(_node_from_doc(doc["antecedent"]), doc["overlap"],
                           _node_from_doc(doc["consequent"]))
    if t == "not_prop":
        return NotProp(_node_from_doc(doc["arg"]))
    if t == "and_prop":
        return AndProp(_node_from_doc(doc["left"]), _node_from_doc(doc["right"]))
    if t == "or_prop":
        return OrProp(_node_from_doc(doc["left"]), _node_from_doc(doc["right"]))
    raise ValueError(f"unknown AST node tag {t!r}")
