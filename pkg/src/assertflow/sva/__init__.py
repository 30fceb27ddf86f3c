"""SVA subset: parser, AST, and three-valued finite-trace semantics."""

from assertflow.sva.ast import (
    AndExpr,
    AndProp,
    BoolSeq,
    DelaySeq,
    EqExpr,
    ExprNode,
    Fell,
    Implication,
    Literal,
    NeqExpr,
    NotExpr,
    NotProp,
    OrExpr,
    OrProp,
    Past,
    PropNode,
    RepeatSeq,
    Rose,
    SeqNode,
    SeqProp,
    SignalRef,
    Stable,
    SvaAst,
    ast_from_doc,
    ast_to_doc,
    collect_signals,
    format_assertion,
    max_span,
)
from assertflow.sva.parser import (
    Diagnostic,
    GrammarError,
    LexError,
    SvaParseError,
    SyntaxReport,
    UnsupportedConstructError,
    check_syntax,
    parse_assertion,
)
from assertflow.sva.semantics import (
    AssertionResult,
    Trace,
    Verdict,
    eval_assertion,
    eval_attempt,
)

__all__ = [
    "AndExpr",
    "AndProp",
    "AssertionResult",
    "BoolSeq",
    "DelaySeq",
    "Diagnostic",
    "EqExpr",
    "ExprNode",
    "Fell",
    "GrammarError",
    "Implication",
    "LexError",
    "Literal",
    "NeqExpr",
    "NotExpr",
    "NotProp",
    "OrExpr",
    "OrProp",
    "Past",
    "PropNode",
    "RepeatSeq",
    "Rose",
    "SeqNode",
    "SeqProp",
    "SignalRef",
    "Stable",
    "SvaAst",
    "SvaParseError",
    "SyntaxReport",
    "Trace",
    "UnsupportedConstructError",
    "Verdict",
    "ast_from_doc",
    "ast_to_doc",
    "check_syntax",
    "collect_signals",
    "eval_assertion",
    "eval_attempt",
    "format_assertion",
    "max_span",
    "parse_assertion",
]
