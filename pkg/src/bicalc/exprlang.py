"""Tokenizer, recursive-descent parser and evaluators for real expressions.

Grammar (whitespace insignificant)::

    expr    := term { ("+"|"-") term }
    term    := unary { ("*"|"/") unary }
    unary   := "-" unary | power
    power   := primary [ "^" unary ]
    primary := NUMBER | IDENT | IDENT "(" expr { "," expr } ")" | "(" expr ")" | cond
    cond    := "if" "(" expr CMP expr "," expr "," expr ")"
    CMP     := "<" | "<=" | ">" | ">=" | "=="

``^`` is right-associative and binds tighter than unary minus, so ``-x1^2``
is ``-(x1^2)`` and ``2^-1`` is ``2^(-1)``.

Variables are ``x1 .. xn``; ``x``/``u`` alias ``x1`` and ``y``/``v`` alias ``x2``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import BicalcError, DomainError, Interval2, ScalarField2, ScalarFieldN

__all__ = [
    "Token", "ParseError", "Number", "Var", "Unary", "Binary", "Call", "Cond",
    "tokenize", "parse", "evaluate", "to_source", "compile_scalar", "compile_vector",
    "compile_field", "compile_field_n", "FUNCTIONS", "CONSTANTS",
]


@dataclass(frozen=True)
class Token:
    kind: str  # number, identifier, operator, lparen, rparen, comma, eof
    text: str
    position: int


class ParseError(BicalcError, ValueError):
    def __init__(self, position: int, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {position}: expected {expected}, found {found}")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Cond:
    cmp: str
    lhs: "Node"
    rhs: "Node"
    then: "Node"
    other: "Node"


Node = Union[Number, Var, Unary, Binary, Call, Cond]

# name -> (min_args, max_args)
FUNCTIONS = {
    "sin": (1, 1), "cos": (1, 1), "tan": (1, 1), "atan": (1, 1), "exp": (1, 1),
    "ln": (1, 1), "sqrt": (1, 1), "abs": (1, 1), "pow": (2, 2),
    "min": (2, None), "max": (2, None),
}
CONSTANTS = {"pi": math.pi, "e": math.e}
ALIASES = {"x": 1, "u": 1, "y": 2, "v": 2}
COMPARISONS = ("<=", ">=", "==", "<", ">")

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<identifier>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<operator><=|>=|==|[-+*/^<>])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
""", re.VERBOSE)


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(pos, "a token", repr(src[pos]))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, arity: int):
        self.tokens = tokenize(src)
        self.i = 0
        self.arity = arity

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.position, expected, repr(t.text) if t.kind != "eof" else "end of input")

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(repr(text) if text else kind)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "eof":
            self.fail("operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "operator" and self.tok.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "operator" and self.tok.text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "operator" and self.tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.tok.kind == "operator" and self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Number(float(t.text))
        if t.kind == "lparen":
            self.advance()
            node = self.expr()
            self.expect("rparen", ")")
            return node
        if t.kind == "identifier":
            self.advance()
            name = t.text
            if name == "if":
                return self.cond()
            if self.tok.kind == "lparen":
                return self.call(t)
            return self.name(t)
        self.fail("expression")

    def name(self, t: Token) -> Node:
        name = t.text
        if name in CONSTANTS:
            return Number(CONSTANTS[name])
        m = re.fullmatch(r"x([1-9]\d*)", name)
        if m:
            k = int(m.group(1))
        elif name in ALIASES:
            k = ALIASES[name]
        else:
            raise ParseError(t.position, "variable or constant", repr(name))
        if k > self.arity:
            raise ParseError(t.position, f"variable x1..x{self.arity}", repr(name))
        return Var(k)

    def call(self, t: Token) -> Node:
        name = t.text
        if name not in FUNCTIONS:
            raise ParseError(t.position, "known function", repr(name))
        self.expect("lparen", "(")
        args = [self.expr()]
        while self.tok.kind == "comma":
            self.advance()
            args.append(self.expr())
        self.expect("rparen", ")")
        lo, hi = FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if lo == hi else f"at least {lo}"
            raise ParseError(t.position, f"{want} argument(s) to {name}", f"{len(args)}")
        return Call(name, tuple(args))

    def cond(self) -> Node:
        self.expect("lparen", "(")
        lhs = self.expr()
        if not (self.tok.kind == "operator" and self.tok.text in COMPARISONS):
            self.fail("comparison")
        cmp = self.advance().text
        rhs = self.expr()
        self.expect("comma", ",")
        then = self.expr()
        self.expect("comma", ",")
        other = self.expr()
        self.expect("rparen", ")")
        return Cond(cmp, lhs, rhs, then, other)


def parse(src: str, arity: int = 2) -> Node:
    """Parse ``src`` into an AST whose variables are within ``arity``."""
    if arity < 1:
        raise ValueError("arity must be >= 1")
    return _Parser(src, arity).parse()


_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def to_source(node: Node) -> str:
    """Fully parenthesised source text; parsing it gives back an equal AST."""
    if isinstance(node, Number):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Unary):
        return f"(-{to_source(node.child)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, Cond):
        return (f"if({to_source(node.lhs)} {node.cmp} {to_source(node.rhs)}, "
                f"{to_source(node.then)}, {to_source(node.other)})")
    raise TypeError(f"not an AST node: {node!r}")


def max_var(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Number):
        return 0
    if isinstance(node, Unary):
        return max_var(node.child)
    if isinstance(node, Binary):
        return max(max_var(node.left), max_var(node.right))
    if isinstance(node, Call):
        return max(max_var(a) for a in node.args)
    return max(max_var(n) for n in (node.lhs, node.rhs, node.then, node.other))


# -- scalar evaluation -------------------------------------------------------

def _finite(v: float) -> float:
    if not math.isfinite(v):
        raise DomainError(f"non-finite intermediate value {v}")
    return v


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except ValueError:
        raise DomainError(f"{a}^{b} is undefined over the reals") from None
    except OverflowError:
        raise DomainError(f"{a}^{b} overflows") from None


def _ln(a: float) -> float:
    if a <= 0.0:
        raise DomainError(f"ln({a}) undefined")
    return math.log(a)


def _sqrt(a: float) -> float:
    if a < 0.0:
        raise DomainError(f"sqrt({a}) undefined")
    return math.sqrt(a)


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError(f"exp({a}) overflows") from None


_SCALAR_FUNCS: dict[str, Callable[..., float]] = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "atan": math.atan,
    "exp": _exp, "ln": _ln, "sqrt": _sqrt, "abs": abs, "pow": _pow,
    "min": min, "max": max,
}

_CMP = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b, ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b, "==": lambda a, b: a == b,
}


def _is_two(node: Node) -> bool:
    return isinstance(node, Number) and node.value == 2.0


def compile_scalar(node: Node) -> Callable[..., float]:
    """Compile an AST to ``fn(*xs) -> float``; failures raise DomainError."""
    if isinstance(node, Number):
        c = float(node.value)
        return lambda *xs: c
    if isinstance(node, Var):
        k = node.index - 1
        return lambda *xs: xs[k]
    if isinstance(node, Unary):
        ch = compile_scalar(node.child)
        return lambda *xs: -ch(*xs)
    if isinstance(node, Binary):
        l, r = compile_scalar(node.left), compile_scalar(node.right)
        op = node.op
        if op == "+":
            return lambda *xs: _finite(l(*xs) + r(*xs))
        if op == "-":
            return lambda *xs: _finite(l(*xs) - r(*xs))
        if op == "*":
            return lambda *xs: _finite(l(*xs) * r(*xs))
        if op == "/":
            return lambda *xs: _finite(_div(l(*xs), r(*xs)))
        if _is_two(node.right):
            def sq(*xs):
                v = l(*xs)
                return _finite(v * v)
            return sq
        return lambda *xs: _finite(_pow(l(*xs), r(*xs)))
    if isinstance(node, Call):
        fn = _SCALAR_FUNCS[node.name]
        args = [compile_scalar(a) for a in node.args]
        if len(args) == 1:
            a0 = args[0]
            return lambda *xs: _finite(fn(a0(*xs)))
        return lambda *xs: _finite(fn(*(a(*xs) for a in args)))
    if isinstance(node, Cond):
        cmp = _CMP[node.cmp]
        lhs, rhs = compile_scalar(node.lhs), compile_scalar(node.rhs)
        then, other = compile_scalar(node.then), compile_scalar(node.other)
        return lambda *xs: then(*xs) if cmp(lhs(*xs), rhs(*xs)) else other(*xs)
    raise TypeError(f"not an AST node: {node!r}")


def evaluate(node: Node, point) -> float:
    """Evaluate ``node`` at ``point``; raises DomainError where undefined."""
    point = [float(v) for v in point]
    if max_var(node) > len(point):
        raise ValueError(f"expression uses x{max_var(node)} but point has {len(point)} coordinates")
    return _finite(compile_scalar(node)(*point))


# -- vectorized evaluation ---------------------------------------------------

def _vfinite(v: np.ndarray) -> np.ndarray:
    if not np.isfinite(v).all():
        raise DomainError("non-finite intermediate value")
    return v


def _vdiv(a, b):
    if np.any(b == 0.0):
        raise DomainError("division by zero")
    return a / b


_VEC_FUNCS: dict[str, Callable[..., np.ndarray]] = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "atan": np.arctan, "exp": np.exp,
    "ln": np.log, "sqrt": np.sqrt, "abs": np.abs, "pow": np.power,
    "min": lambda *a: np.minimum.reduce(a), "max": lambda *a: np.maximum.reduce(a),
}

_VCMP = {
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal, "==": np.equal,
}


def compile_vector(node: Node) -> Callable[..., np.ndarray]:
    """Compile to ``fn(*xs)`` over equal-length 1-D arrays.

    Conditional branches are evaluated only on the points that select them.
    """
    if isinstance(node, Number):
        c = float(node.value)
        return lambda *xs: np.full(xs[0].shape, c)
    if isinstance(node, Var):
        k = node.index - 1
        return lambda *xs: xs[k]
    if isinstance(node, Unary):
        ch = compile_vector(node.child)
        return lambda *xs: -ch(*xs)
    if isinstance(node, Binary):
        l, r = compile_vector(node.left), compile_vector(node.right)
        op = node.op
        if op == "+":
            return lambda *xs: _vfinite(l(*xs) + r(*xs))
        if op == "-":
            return lambda *xs: _vfinite(l(*xs) - r(*xs))
        if op == "*":
            return lambda *xs: _vfinite(l(*xs) * r(*xs))
        if op == "/":
            return lambda *xs: _vfinite(_vdiv(l(*xs), r(*xs)))
        if _is_two(node.right):
            def sq(*xs):
                v = l(*xs)
                return _vfinite(v * v)
            return sq
        return lambda *xs: _vfinite(np.power(l(*xs), r(*xs)))
    if isinstance(node, Call):
        fn = _VEC_FUNCS[node.name]
        args = [compile_vector(a) for a in node.args]
        return lambda *xs: _vfinite(np.asarray(fn(*(a(*xs) for a in args)), dtype=float))
    if isinstance(node, Cond):
        cmp = _VCMP[node.cmp]
        lhs, rhs = compile_vector(node.lhs), compile_vector(node.rhs)
        then, other = compile_vector(node.then), compile_vector(node.other)

        def cond(*xs):
            mask = cmp(lhs(*xs), rhs(*xs))
            out = np.empty(xs[0].shape)
            if mask.any():
                out[mask] = then(*(x[mask] for x in xs))
            inv = ~mask
            if inv.any():
                out[inv] = other(*(x[inv] for x in xs))
            return out
        return cond
    raise TypeError(f"not an AST node: {node!r}")


def compile_field(src: str, domain_hint: Optional[Interval2] = None) -> ScalarField2:
    """Parse a two-variable expression into a ScalarField2."""
    ast = parse(src, 2)
    scalar = compile_scalar(ast)
    vector = compile_vector(ast)

    def vec(x1, x2):
        b1, b2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        shape = b1.shape
        flat1, flat2 = b1.ravel(), b2.ravel()
        if flat1.size == 0:
            return np.empty(shape)
        return vector(flat1, flat2).reshape(shape)

    f = ScalarField2(scalar, vectorized=vec, domain_hint=domain_hint, label=src)
    f.ast = ast
    return f


def compile_field_n(src: str, arity: int) -> ScalarFieldN:
    ast = parse(src, arity)
    f = ScalarFieldN(arity, compile_scalar(ast), label=src)
    f.ast = ast
    return f
