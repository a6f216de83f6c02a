"""Parser and evaluator for potential expressions ``f(q)``.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | 'q' | '(' expr ')' | func '(' expr ')'
    func   := 'sqrt' | 'exp' | 'sin' | 'cos' | 'abs'

Evaluation returns values and exact first derivatives (forward mode).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("sqrt", "exp", "sin", "cos", "abs")


class ExpressionError(ValueError):
    """Parse failure with the byte offset where it happened."""

    def __init__(self, text: str, offset: int, expected: list[str], found: str):
        self.text = text
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(
            f"parse error at byte {offset} in {text!r}: expected {' or '.join(expected)}, "
            f"found {found}"
        )


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, BinOp, Pow, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    raw = text.encode()
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            off = len(text[:pos].encode()) + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionError(text, off, ["number", "'q'", "function", "operator"],
                                  repr(text[pos:].lstrip()[:1]))
        kind = m.lastgroup
        start = len(text[: m.start(kind)].encode())
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: list[str]):
        kind, value, off = self.peek()
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionError(self.text, off, expected, found)

    def expect_op(self, op: str):
        kind, value, _ = self.peek()
        if kind != "op" or value != op:
            self.fail([repr(op)])
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            kind, value, _ = self.peek()
            if kind != "number" or not value.isdigit():
                self.fail(["non-negative integer exponent"])
            self.advance()
            node = Pow(node, int(value))
        return node

    def base(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "number":
            self.advance()
            return Num(float(value))
        if kind == "name":
            if value == "q":
                self.advance()
                return Var()
            if value in FUNCTIONS:
                self.advance()
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            self.fail(["number", "'q'", "'('"] + [f"'{f}'" for f in FUNCTIONS])
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(["number", "'q'", "'('"] + [f"'{f}'" for f in FUNCTIONS])


def parse(text: str) -> Node:
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Canonical, fully parenthesised form (re-parses to an equal tree)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "q"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if isinstance(node.base, Pow):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    return f"{node.func}({to_text(node.arg)})"


def evaluate(node: Node, q):
    """Return ``(f(q), f'(q))`` as float arrays."""
    q = np.asarray(q, dtype=float)
    with np.errstate(all="ignore"):
        v, d = _ev(node, q)
    return np.broadcast_to(v, q.shape).astype(float), np.broadcast_to(d, q.shape).astype(float)


def _ev(node, q):
    if isinstance(node, Num):
        return node.value, 0.0
    if isinstance(node, Var):
        return q, 1.0
    if isinstance(node, BinOp):
        a, da = _ev(node.left, q)
        b, db = _ev(node.right, q)
        if node.op == "+":
            return a + b, da + db
        if node.op == "-":
            return a - b, da - db
        if node.op == "*":
            return a * b, da * b + a * db
        return a / b, (da * b - a * db) / (b * b)
    if isinstance(node, Pow):
        a, da = _ev(node.base, q)
        n = node.exponent
        if n == 0:
            return 1.0, 0.0
        return a**n, n * a ** (n - 1) * da
    a, da = _ev(node.arg, q)
    if node.func == "sqrt":
        r = np.sqrt(a)
        return r, da / (2 * r)
    if node.func == "exp":
        e = np.exp(a)
        return e, e * da
    if node.func == "sin":
        return np.sin(a), np.cos(a) * da
    if node.func == "cos":
        return np.cos(a), -np.sin(a) * da
    return np.abs(a), np.sign(a) * da


def kinks(node: Node, q) -> bool:
    """True when an ``abs`` argument changes sign on the sample points."""
    q = np.asarray(q, dtype=float)

    def walk(n):
        if isinstance(n, BinOp):
            return walk(n.left) or walk(n.right)
        if isinstance(n, Pow):
            return walk(n.base)
        if isinstance(n, Call):
            if n.func == "abs":
                with np.errstate(all="ignore"):
                    a, _ = _ev(n.arg, q)
                a = np.broadcast_to(a, q.shape)
                if np.any(a > 0) and np.any(a < 0):
                    return True
            return walk(n.arg)
        return False

    return walk(node)


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with its source text."""

    text: str
    tree: Node

    @classmethod
    def parse(cls, text: str) -> "Expression":
        return cls(text, parse(text))

    def __call__(self, q):
        return evaluate(self.tree, q)[0]

    def derivative(self, q):
        return evaluate(self.tree, q)[1]
