"""Tokenizer for the SVA subset, with line/column positions on every token."""

from __future__ import annotations

from dataclasses import dataclass

from assertflow.errors import SvaParseError

# Words with grammatical meaning in the subset. These can never be signal names.
KEYWORDS = frozenset({"assert", "property", "posedge", "not", "and", "or"})

# Recognized SVA constructs that the subset deliberately rejects. Naming them
# lets the parser emit an unsupported-construct diagnostic instead of a
# confusing generic grammar error.
UNSUPPORTED_KEYWORDS = frozenset({
    "disable", "iff", "negedge", "throughout", "intersect", "within",
    "first_match", "always", "s_always", "eventually", "s_eventually",
    "nexttime", "s_nexttime", "until", "s_until", "until_with", "s_until_with",
    "implies", "strong", "weak", "local", "var", "sequence", "endsequence",
    "accept_on", "reject_on",
})

SAMPLED_FUNCS = frozenset({"$rose", "$fell", "$stable", "$past"})


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int  # 1-based
    col: int  # 1-based


class LexError(SvaParseError):
    """Input contains a character sequence outside the token alphabet."""


_SINGLE = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACK",
    "]": "RBRACK",
    "*": "STAR",
    "+": "PLUS",
    ":": "COLON",
    ",": "COMMA",
    ";": "SEMI",
    "@": "AT",
    "$": "DOLLAR",
}


def tokenize(text: str) -> list[Token]:
    """Lex the input into a token list ending with an EOF token.

    Line comments (//) and block comments are skipped.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def error(message: str, tok_text: str = "") -> LexError:
        return LexError(message, line, col, tok_text)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise error("unterminated block comment", "/*")
            for j in range(i, end + 2):
                if text[j] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = end + 2
            continue

        start_line, start_col = line, col

        if text.startswith("|->", i):
            tokens.append(Token("OVL_IMPL", "|->", start_line, start_col))
            i += 3
            col += 3
            continue
        if text.startswith("|=>", i):
            tokens.append(Token("NONOVL_IMPL", "|=>", start_line, start_col))
            i += 3
            col += 3
            continue
        if text.startswith("||", i):
            tokens.append(Token("OR2", "||", start_line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("&&", i):
            tokens.append(Token("AND2", "&&", start_line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("==", i):
            tokens.append(Token("EQ2", "==", start_line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("!=", i):
            tokens.append(Token("NEQ", "!=", start_line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("##", i):
            tokens.append(Token("DELAY", "##", start_line, start_col))
            i += 2
            col += 2
            continue
        if text.startswith("[->", i) or text.startswith("[=", i):
            raise error("goto/non-consecutive repetition is not supported", text[i:i + 3])
        if ch == "!":
            tokens.append(Token("BANG", "!", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "&":
            raise error("single '&' is not supported; use '&&'", "&")
        if ch == "|":
            raise error("single '|' is not supported; use '||', '|->' or '|=>'", "|")
        if ch == "=":
            raise error("single '=' is not supported; use '=='", "=")
        if ch == "$":
            # $rose/$fell/$stable/$past, or a bare $ (unbounded marker in ranges)
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in SAMPLED_FUNCS:
                tokens.append(Token("SFUNC", word, start_line, start_col))
            elif word == "$":
                tokens.append(Token("DOLLAR", "$", start_line, start_col))
            else:
                raise error(f"unknown system function {word!r}", word)
            col += j - i
            i = j
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # sized binary literal: 1'b0 / 1'b1
            if j < n and text[j] == "'":
                if text.startswith("'b0", j) or text.startswith("'b1", j):
                    word = text[i:j + 3]
                    tokens.append(Token("NUMBER", word, start_line, start_col))
                    col += len(word)
                    i = j + 3
                    continue
                raise error("only 1'b0 / 1'b1 sized literals are supported", text[i:j + 2])
            word = text[i:j]
            tokens.append(Token("NUMBER", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(Token("IDENT", word, start_line, start_col))
            col += j - i
            i = j
            continue
        raise error(f"unexpected character {ch!r}", ch)

    tokens.append(Token("EOF", "", line, col))
    return tokens


def number_value(tok: Token) -> int:
    """Integer value of a NUMBER token (handles 1'b0/1'b1)."""
    if "'" in tok.text:
        return int(tok.text[-1])
    return int(tok.text)
