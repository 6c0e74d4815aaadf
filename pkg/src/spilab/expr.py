"""Tiny recursive-descent parser for potential expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ['-'] atom ('^' number)?
    atom   := number | 'x' | 'abs(' expr ')' | 'exp(' expr ')'
            | 'log(' expr ')' | '(' expr ')'

The result is a vectorized closure over numpy arrays.
"""

import re

import numpy as np

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\S))")
_FUNCS = {"abs": np.abs, "exp": np.exp, "log": np.log}


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = ("+" if op == "+" else "-", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = (op, node, rhs)
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return ("neg", self.factor())
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, text, pos = self.take()
            if kind != "num":
                raise ParseError(f"expected number after '^', found {text or 'end of input'!r}", pos)
            node = ("^", node, float(text))
        return node

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return ("num", float(text))
        if kind == "name":
            if text == "x":
                return ("x",)
            if text in _FUNCS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return ("call", text, inner)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse(src):
    """Parse ``src`` into a nested-tuple syntax tree."""
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(src)
    tree = p.expr()
    kind, text, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {text!r}", pos)
    return tree


def _build(node):
    tag = node[0]
    if tag == "num":
        value = node[1]
        return lambda x: np.full(np.shape(x), value)
    if tag == "x":
        return lambda x: np.asarray(x, dtype=float)
    if tag == "neg":
        f = _build(node[1])
        return lambda x: -f(x)
    if tag == "call":
        fn, f = _FUNCS[node[1]], _build(node[2])
        return lambda x: fn(f(x))
    if tag == "^":
        f, k = _build(node[1]), node[2]
        return lambda x: f(x) ** k
    f, g = _build(node[1]), _build(node[2])
    if tag == "+":
        return lambda x: f(x) + g(x)
    if tag == "-":
        return lambda x: f(x) - g(x)
    if tag == "*":
        return lambda x: f(x) * g(x)
    return lambda x: f(x) / g(x)


def compile_expression(src):
    """Vectorized callable ``V(x)`` for the expression ``src``."""
    return _build(parse(src))
