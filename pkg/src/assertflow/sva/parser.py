"""Recursive-descent parser for the SVA subset.

The concrete grammar layers properties over sequences over boolean
expressions. Parenthesized groups are parsed at the property level and
then demoted to the level the surrounding context needs, which resolves
the shared ``(`` ambiguity without backtracking; a demotion that would
lose structure (for example a property on one side of ``##``) is a
positioned grammar error.

Out-of-subset constructs that are recognizable SVA (``disable iff``,
unbounded repetition, multiple clocks, ``throughout`` ...) are rejected
with a dedicated unsupported-construct diagnostic rather than a generic
one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from assertflow.errors import SvaParseError
from assertflow.sva import ast as A
from assertflow.sva.lexer import (
    KEYWORDS,
    UNSUPPORTED_KEYWORDS,
    LexError,
    Token,
    number_value,
    tokenize,
)

__all__ = [
    "Diagnostic",
    "GrammarError",
    "LexError",
    "SvaParseError",
    "SyntaxReport",
    "UnsupportedConstructError",
    "check_syntax",
    "parse_assertion",
]


class GrammarError(SvaParseError):
    """Token stream does not match the subset grammar."""


class UnsupportedConstructError(SvaParseError):
    """Well-formed SVA outside the supported subset."""


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    token: str


@dataclass(frozen=True)
class SyntaxReport:
    ok: bool
    diagnostics: tuple[Diagnostic, ...] = field(default_factory=tuple)


def parse_assertion(text: str) -> A.SvaAst:
    """Parse one assertion of the form ``assert property (@(posedge clk) ...);``.

    Raises LexError, GrammarError or UnsupportedConstructError, each with
    a 1-based line/column position. An optional leading ``label:`` is
    recorded on the returned AST.
    """
    if not text.strip():
        raise GrammarError("empty input", 1, 1)
    return _Parser(tokenize(text)).parse()


def check_syntax(text: str) -> SyntaxReport:
    """Never-raising wrapper around parse_assertion; errors become data."""
    try:
        parse_assertion(text)
    except SvaParseError as exc:
        return SyntaxReport(ok=False, diagnostics=(
            Diagnostic(exc.line, exc.col, exc.message, exc.token),))
    return SyntaxReport(ok=True)


_EXPR_KINDS = (A.SignalRef, A.Literal, A.NotExpr, A.AndExpr, A.OrExpr,
               A.EqExpr, A.NeqExpr, A.Rose, A.Fell, A.Stable, A.Past)
_SEQ_KINDS = (A.BoolSeq, A.DelaySeq, A.RepeatSeq)


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}, got {self._describe(tok)}", tok)
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "EOF" else repr(tok.text)

    @staticmethod
    def error(message: str, tok: Token) -> GrammarError:
        return GrammarError(message, tok.line, tok.col, tok.text)

    @staticmethod
    def unsupported(message: str, tok: Token) -> UnsupportedConstructError:
        return UnsupportedConstructError(message, tok.line, tok.col, tok.text)

    def check_unsupported_word(self, tok: Token) -> None:
        if tok.kind == "IDENT" and tok.text in UNSUPPORTED_KEYWORDS:
            raise self.unsupported(
                f"{tok.text!r} is not part of the supported assertion subset", tok)

    # -- entry point --------------------------------------------------------

    def parse(self) -> A.SvaAst:
        label = None
        if self.peek().kind == "IDENT" and self.peek(1).kind == "COLON" \
                and self.peek().text not in KEYWORDS:
            self.check_unsupported_word(self.peek())
            label = self.advance().text
            self.advance()  # colon

        tok = self.peek()
        if not (tok.kind == "IDENT" and tok.text == "assert"):
            raise self.error(f"expected 'assert', got {self._describe(tok)}", tok)
        self.advance()
        tok = self.peek()
        if not (tok.kind == "IDENT" and tok.text == "property"):
            raise self.error(f"expected 'property', got {self._describe(tok)}", tok)
        self.advance()
        self.expect("LPAREN", "'('")

        clock = self.parse_clocking()

        tok = self.peek()
        self.check_unsupported_word(tok)  # e.g. 'disable iff (...)'

        prop = self.as_prop(self.parse_property())

        self.expect("RPAREN", "')'")
        self.expect("SEMI", "';'")
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected trailing input {self._describe(tok)}", tok)
        return A.SvaAst(clock_event=clock, property=prop, label=label)

    def parse_clocking(self) -> str:
        self.expect("AT", "'@'")
        self.expect("LPAREN", "'('")
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "negedge":
            raise self.unsupported("only 'posedge' clocking is supported", tok)
        if not (tok.kind == "IDENT" and tok.text == "posedge"):
            raise self.error(f"expected 'posedge', got {self._describe(tok)}", tok)
        self.advance()
        name = self.expect("IDENT", "clock signal name")
        if name.text in KEYWORDS:
            raise self.error(f"{name.text!r} cannot be used as a clock name", name)
        self.check_unsupported_word(name)
        tok = self.peek()
        if tok.kind in ("COMMA",) or (tok.kind == "IDENT" and tok.text == "or"):
            raise self.unsupported("multiple clocks are not supported", tok)
        self.expect("RPAREN", "')'")
        return f"posedge {name.text}"

    # -- property level -----------------------------------------------------

    def parse_property(self):
        left = self.parse_prop_or()
        tok = self.peek()
        if tok.kind in ("OVL_IMPL", "NONOVL_IMPL"):
            self.advance()
            antecedent = self.as_seq(left, tok, "the antecedent of an implication")
            consequent = self.as_prop(self.parse_property())  # right-associative
            return A.Implication(antecedent, tok.kind == "OVL_IMPL", consequent)
        return left

    def parse_prop_or(self):
        left = self.parse_prop_and()
        while self.peek().kind == "IDENT" and self.peek().text == "or":
            self.advance()
            right = self.parse_prop_and()
            left = A.OrProp(self.as_prop(left), self.as_prop(right))
        return left

    def parse_prop_and(self):
        left = self.parse_prop_not()
        while self.peek().kind == "IDENT" and self.peek().text == "and":
            self.advance()
            right = self.parse_prop_not()
            left = A.AndProp(self.as_prop(left), self.as_prop(right))
        return left

    def parse_prop_not(self):
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "not":
            self.advance()
            return A.NotProp(self.as_prop(self.parse_prop_not()))
        return self.parse_seq_chain()

    # -- sequence level -----------------------------------------------------

    def parse_seq_chain(self):
        if self.peek().kind == "DELAY":
            # leading delay: '##n seq' is sugar for '1 ##n seq'
            first = A.BoolSeq(A.Literal(1))
        else:
            first = self.parse_seq_atom()
            if self.peek().kind != "DELAY":
                return first
            first = self.as_seq(first, self.peek(), "the left side of '##'")
        acc = first
        while self.peek().kind == "DELAY":
            op = self.advance()
            lo, hi = self.parse_delay_bounds(op)
            right = self.as_seq(self.parse_seq_atom(), op, "the right side of '##'")
            acc = A.DelaySeq(acc, lo, hi, right)
        return acc

    def parse_delay_bounds(self, op: Token) -> tuple[int, int]:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            n = number_value(tok)
            return n, n
        if tok.kind == "LBRACK":
            self.advance()
            lo_tok = self.peek()
            if lo_tok.kind == "DOLLAR":
                raise self.unsupported("unbounded delay ranges are not supported", lo_tok)
            lo = number_value(self.expect("NUMBER", "delay lower bound"))
            self.expect("COLON", "':'")
            hi_tok = self.peek()
            if hi_tok.kind == "DOLLAR":
                raise self.unsupported("unbounded delay ranges are not supported", hi_tok)
            hi = number_value(self.expect("NUMBER", "delay upper bound"))
            close = self.expect("RBRACK", "']'")
            if lo > hi:
                raise self.error(f"delay range [{lo}:{hi}] has lower bound above upper bound",
                                 close)
            return lo, hi
        raise self.error(f"expected a delay count after '##', got {self._describe(tok)}", tok)

    def parse_seq_atom(self):
        node = self.parse_expr_or()
        if self.peek().kind == "LBRACK":
            open_tok = self.advance()
            lo, hi = self.parse_repeat_bounds(open_tok)
            if not isinstance(node, _EXPR_KINDS):
                raise self.error(
                    "repetition applies to boolean expressions only", open_tok)
            return A.RepeatSeq(node, lo, hi)
        return node

    def parse_repeat_bounds(self, open_tok: Token) -> tuple[int, int]:
        tok = self.peek()
        if tok.kind == "PLUS":
            raise self.unsupported("unbounded repetition '[+]' is not supported", tok)
        if tok.kind != "STAR":
            raise self.error(f"expected '*' in repetition, got {self._describe(tok)}", tok)
        self.advance()
        tok = self.peek()
        if tok.kind == "RBRACK":
            raise self.unsupported("unbounded repetition '[*]' is not supported", tok)
        if tok.kind == "DOLLAR":
            raise self.unsupported("unbounded repetition is not supported", tok)
        lo_tok = self.expect("NUMBER", "repetition count")
        lo = number_value(lo_tok)
        hi = lo
        if self.peek().kind == "COLON":
            self.advance()
            hi_tok = self.peek()
            if hi_tok.kind == "DOLLAR":
                raise self.unsupported("unbounded repetition is not supported", hi_tok)
            hi = number_value(self.expect("NUMBER", "repetition upper bound"))
        close = self.expect("RBRACK", "']'")
        if lo < 1:
            raise self.error("repetition count must be at least 1", lo_tok)
        if lo > hi:
            raise self.error(f"repetition range [*{lo}:{hi}] has lower bound above upper bound",
                             close)
        return lo, hi

    # -- expression level ---------------------------------------------------

    def parse_expr_or(self):
        left = self.parse_expr_and()
        while self.peek().kind == "OR2":
            op = self.advance()
            right = self.parse_expr_and()
            left = A.OrExpr(self.as_expr(left, op), self.as_expr(right, op))
        return left

    def parse_expr_and(self):
        left = self.parse_expr_eq()
        while self.peek().kind == "AND2":
            op = self.advance()
            right = self.parse_expr_eq()
            left = A.AndExpr(self.as_expr(left, op), self.as_expr(right, op))
        return left

    def parse_expr_eq(self):
        left = self.parse_expr_unary()
        while self.peek().kind in ("EQ2", "NEQ"):
            op = self.advance()
            right = self.parse_expr_unary()
            cls = A.EqExpr if op.kind == "EQ2" else A.NeqExpr
            left = cls(self.as_expr(left, op), self.as_expr(right, op))
        return left

    def parse_expr_unary(self):
        tok = self.peek()
        if tok.kind == "BANG":
            self.advance()
            return A.NotExpr(self.as_expr(self.parse_expr_unary(), tok))
        return self.parse_expr_primary()

    def parse_expr_primary(self):
        tok = self.peek()
        if tok.kind == "IDENT":
            self.check_unsupported_word(tok)
            if tok.text in KEYWORDS:
                raise self.error(f"keyword {tok.text!r} is not allowed here", tok)
            self.advance()
            return A.SignalRef(tok.text)
        if tok.kind == "NUMBER":
            self.advance()
            value = number_value(tok)
            if value not in (0, 1):
                raise self.error(f"only 1-bit literals 0 and 1 are supported, got {tok.text}",
                                 tok)
            return A.Literal(value)
        if tok.kind == "SFUNC":
            return self.parse_sampled_func()
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_property()
            self.expect("RPAREN", "')'")
            # demote as far as the structure allows; context re-checks level
            if isinstance(inner, A.SeqProp):
                if isinstance(inner.seq, A.BoolSeq):
                    return inner.seq.expr
                return inner.seq
            return inner
        raise self.error(f"expected an expression, got {self._describe(tok)}", tok)

    def parse_sampled_func(self):
        func = self.advance()
        self.expect("LPAREN", "'('")
        if func.text in ("$rose", "$fell", "$stable"):
            arg = self.peek()
            if arg.kind != "IDENT" or arg.text in KEYWORDS:
                raise self.error(f"{func.text} takes a signal name argument", arg)
            self.check_unsupported_word(arg)
            self.advance()
            self.expect("RPAREN", "')'")
            cls = {"$rose": A.Rose, "$fell": A.Fell, "$stable": A.Stable}[func.text]
            return cls(arg.text)
        # $past(expr [, depth])
        arg = self.as_expr(self.parse_expr_or(), func)
        depth = 1
        if self.peek().kind == "COMMA":
            self.advance()
            depth_tok = self.expect("NUMBER", "$past depth")
            depth = number_value(depth_tok)
            if depth < 1:
                raise self.error("$past depth must be at least 1", depth_tok)
        self.expect("RPAREN", "')'")
        return A.Past(arg, depth)

    # -- level coercions ----------------------------------------------------

    def as_prop(self, node) -> A.PropNode:
        if isinstance(node, _EXPR_KINDS):
            return A.SeqProp(A.BoolSeq(node))
        if isinstance(node, _SEQ_KINDS):
            return A.SeqProp(node)
        return node

    def as_seq(self, node, at: Token, what: str) -> A.SeqNode:
        if isinstance(node, _EXPR_KINDS):
            return A.BoolSeq(node)
        if isinstance(node, _SEQ_KINDS):
            return node
        raise self.error(f"{what} must be a sequence, not a property expression", at)

    def as_expr(self, node, op: Token) -> A.ExprNode:
        if isinstance(node, _EXPR_KINDS):
            return node
        raise self.error(
            f"operand of {op.text!r} must be a boolean expression", op)
