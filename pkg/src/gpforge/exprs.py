"""Prefix expression syntax for terms and polynomials.

Expressions are sums of optionally-signed rational multiples of prefix
applications, e.g. ``br(mul(x1, x2), x3) - 1/2 * mul(x1, D(x3))``.  The
printer emits variables as ``x1, x2, ...``; the parser also accepts arbitrary
identifiers (``a, b, c``) numbered by first appearance.  ``@`` denotes the
hole of a one-hole context.  Parsing and printing are mutually inverse on
canonical forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .terms import (
    Apply,
    Monomial,
    OperationSignature,
    Poly,
    Term,
    TermError,
    Var,
    apply_op,
    d_apply,
    normalize,
    poly_of,
    term_key,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Printing


def fraction_to_text(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def fraction_from_text(text: str) -> Fraction:
    return Fraction(text)


def term_to_text(t: Term, sig: OperationSignature) -> str:
    if isinstance(t, Var):
        body = "@" if t.index == 0 else f"x{t.index}"
        dname = sig.derivation or "D"
        for _ in range(t.dpow):
            body = f"{dname}({body})"
        return body
    args = ", ".join(term_to_text(c, sig) for c in t.children)
    return f"{t.op}({args})"


def poly_to_text(p: Poly, sig: OperationSignature) -> str:
    if p.is_zero():
        return "0"
    chunks: list[str] = []
    for i, m in enumerate(p.monomials):
        c = m.coeff
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = term_to_text(m.term, sig)
        piece = body if mag == 1 else f"{fraction_to_text(mag)} * {body}"
        if i == 0:
            chunks.append(piece if c > 0 else f"-{piece}")
        else:
            chunks.append(f"{sign} {piece}")
    return " ".join(chunks)


# ---------------------------------------------------------------------------
# Tokenizer (shared with the script-level DSL)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<sym>[-+*/(),;:={}@\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str   # "int" | "ident" | "string" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_sym(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == text

    def accept_sym(self, text: str) -> bool:
        if self.at_sym(text):
            self.next()
            return True
        return False

    def expect_sym(self, text: str) -> Token:
        tok = self.peek()
        if not self.at_sym(text):
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"expected {what}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.next()

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)


# ---------------------------------------------------------------------------
# Expression parsing

_VAR_PATTERN = re.compile(r"^x(\d+)$")


class VarNamer:
    """Maps source variable names to 1-based indices.

    Names of the form ``x<k>`` use the explicit index; any other identifiers
    are numbered by first appearance.  Mixing the two styles is rejected."""

    def __init__(self):
        self.explicit: bool | None = None
        self.names: dict[str, int] = {}

    def resolve(self, name: str, tok: Token) -> int:
        m = _VAR_PATTERN.match(name)
        if m:
            if self.explicit is False:
                raise ParseError(f"cannot mix indexed variable {name!r} with named variables",
                                 tok.line, tok.col)
            self.explicit = True
            idx = int(m.group(1))
            if idx < 1:
                raise ParseError(f"variable index must be >= 1 in {name!r}", tok.line, tok.col)
            return idx
        if self.explicit is True:
            raise ParseError(f"cannot mix named variable {name!r} with indexed variables",
                             tok.line, tok.col)
        self.explicit = False
        if name not in self.names:
            self.names[name] = len(self.names) + 1
        return self.names[name]


def _parse_rational(ts: TokenStream) -> Fraction:
    tok = ts.next()
    num = int(tok.text)
    if ts.at_sym("/"):
        ts.next()
        den_tok = ts.peek()
        if den_tok.kind != "int":
            ts.error("expected denominator after '/'")
        ts.next()
        return Fraction(num, int(den_tok.text))
    return Fraction(num)


def parse_expr_tokens(ts: TokenStream, sig: OperationSignature,
                      namer: VarNamer | None = None,
                      allow_hole: bool = False) -> Poly:
    """Parse a sum of rational multiples of prefix applications into a Poly."""
    namer = namer or VarNamer()

    def parse_factor() -> Poly:
        tok = ts.peek()
        if tok.kind == "sym" and tok.text == "@":
            if not allow_hole:
                ts.error("context hole '@' is not allowed here")
            ts.next()
            return poly_of(Var(0, 0))
        if tok.kind == "sym" and tok.text == "(":
            ts.next()
            inner = parse_sum()
            ts.expect_sym(")")
            return inner
        if tok.kind != "ident":
            ts.error(f"expected a term, found {tok.text or 'end of input'!r}")
        ts.next()
        name = tok.text
        if ts.accept_sym("("):
            args = [parse_sum()]
            while ts.accept_sym(","):
                args.append(parse_sum())
            ts.expect_sym(")")
            if sig.is_derivation(name):
                if len(args) != 1:
                    raise ParseError(f"derivation {name} takes one argument", tok.line, tok.col)
                return d_apply(args[0], 1, sig)
            try:
                return apply_op(sig, name, *args)
            except TermError as e:
                raise ParseError(str(e), tok.line, tok.col) from None
        if sig.has_op(name) or sig.is_derivation(name):
            raise ParseError(f"operation {name!r} needs arguments", tok.line, tok.col)
        return poly_of(Var(namer.resolve(name, tok), 0))

    def parse_signed() -> Poly:
        sign = Fraction(1)
        while True:
            if ts.accept_sym("-"):
                sign = -sign
            elif ts.accept_sym("+"):
                pass
            else:
                break
        if ts.peek().kind == "int":
            coeff = _parse_rational(ts)
            if ts.accept_sym("*"):
                return sign * coeff * parse_factor()
            if coeff == 0:
                return Poly()
            tok = ts.peek()
            raise ParseError("a bare nonzero rational is not a polynomial term",
                             tok.line, tok.col)
        return sign * parse_factor()

    def parse_sum() -> Poly:
        acc = parse_signed()
        while ts.peek().kind == "sym" and ts.peek().text in "+-":
            op = ts.next().text
            rhs = parse_signed()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    return parse_sum()


def parse_expr(text: str, sig: OperationSignature, allow_hole: bool = False) -> Poly:
    ts = TokenStream(tokenize(text))
    p = parse_expr_tokens(ts, sig, allow_hole=allow_hole)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return p


def parse_term(text: str, sig: OperationSignature, allow_hole: bool = False) -> Term:
    """Parse an expression that must be a single monomial with coefficient 1."""
    p = parse_expr(text, sig, allow_hole=allow_hole)
    if len(p.monomials) != 1 or p.monomials[0].coeff != 1:
        raise TermError(f"expected a single plain term, got {text!r}")
    return p.monomials[0].term
