"""Tokenizer and recursive-descent parser for the expression language.

Grammar (EBNF, see docs/grammar.md)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;
    atom    = number | "f" | vector [ "[" integer "]" ]
            | func "(" expr { "," expr } ")" | "(" expr ")" ;
"""

import re
from dataclasses import dataclass

from .errors import ArityError, FexprSyntaxError, IndexOutOfRange, ShapeError, UnknownIdentifier
from .nodes import AGGREGATES, ARITY, SCALARS, VECTORS, BinOp, Call, Index, Neg, Num, Pos, Var

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<num>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, eof
    text: str
    pos: Pos


def tokenize(source):
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        pos = Pos(line, i - line_start + 1)
        if m is None:
            raise FexprSyntaxError("unexpected character", pos, source[i])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, len(source) - line_start + 1)))
    return tokens


class _Parser:
    def __init__(self, source):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.text != text or tok.kind == "eof":
            shown = tok.text if tok.kind != "eof" else "<end of input>"
            raise FexprSyntaxError(f"expected {text!r}", tok.pos, shown)
        return self.advance()

    def parse(self):
        expr = self.expr()
        if self.tok.kind != "eof":
            raise FexprSyntaxError("unexpected token", self.tok.pos, self.tok.text)
        if expr.is_vector:
            raise ShapeError("expression must be scalar; wrap vectors in dot/sum/norm2", expr.pos)
        return expr

    def expr(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            left = BinOp(op.text, left, self.term(), pos=op.pos)
        return left

    def term(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            left = BinOp(op.text, left, self.unary(), pos=op.pos)
        return left

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Neg(self.unary(), pos=op.pos)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            return BinOp("^", base, self.unary(), pos=op.pos)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text), pos=tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in SCALARS:
                return Var(name, pos=tok.pos)
            if name in VECTORS:
                if self.tok.text == "[" and self.tok.kind == "op":
                    return self.index(name, tok.pos)
                return Var(name, pos=tok.pos)
            if name in ARITY:
                return self.call(name, tok.pos)
            raise UnknownIdentifier("unknown identifier", tok.pos, name)
        shown = tok.text if tok.kind != "eof" else "<end of input>"
        raise FexprSyntaxError("expected an operand", tok.pos, shown)

    def index(self, name, pos):
        self.expect("[")
        tok = self.tok
        if tok.kind != "num" or not tok.text.isdigit():
            raise FexprSyntaxError("index must be an integer literal", tok.pos, tok.text or None)
        self.advance()
        idx = int(tok.text)
        if idx < 1:
            raise IndexOutOfRange("indices are 1-based", tok.pos, tok.text)
        self.expect("]")
        return Index(name, idx, pos=pos)

    def call(self, name, pos):
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != ARITY[name]:
            raise ArityError(
                f"{name} takes {ARITY[name]} argument(s), got {len(args)}", pos, name
            )
        if name in AGGREGATES:
            for arg in args:
                if not arg.is_vector:
                    raise ShapeError(f"{name} expects vector arguments", arg.pos)
        return Call(name, tuple(args), pos=pos)


def parse(source):
    """Parse ``source`` into an :class:`~twm_lab.fexpr.nodes.Expr`.

    Raises FexprSyntaxError, ArityError, UnknownIdentifier or ShapeError, each
    carrying a 1-based line/column and the offending token.
    """
    return _Parser(source).parse()
