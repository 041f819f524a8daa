"""Tiny arithmetic expression language for kernels and right-hand sides.

Grammar, loosest binding first::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr                  # binds looser than '^'
            | expr '^' expr             # right associative
            | number | name | name '(' expr ')' | '(' expr ')'

Evaluation is vectorised: variables may be bound to numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ExprEvalError, ExprSyntaxError, InvalidArgument, UnboundVariableError, UnknownIdentifierError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

# binding power and right-associativity of the binary operators
BINARY = {"+": (1, False), "-": (1, False), "*": (2, False), "/": (2, False), "^": (4, True)}
UNARY_MINUS_POWER = 3


def variables_for(dim: int, which: str = "xs") -> tuple[str, ...]:
    """Identifiers allowed in ``dim`` dimensions, e.g. ``('x', 's')`` or ``('x1', 'x2')``."""
    if dim == 1:
        return tuple(which)
    if dim == 2:
        return tuple(f"{v}{i}" for v in which for i in (1, 2))
    raise InvalidArgument(f"unsupported dimension {dim}")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, Bin, Call]

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | end
    text: str
    offset: int  # byte offset into the source


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    byte_of = lambda i: len(text[:i].encode("utf-8"))  # noqa: E731
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise ExprSyntaxError(byte_of(pos), f"unexpected character {text[pos]!r}", text)
        if match.lastgroup != "ws":
            tokens.append(Token(match.lastgroup, match.group(), byte_of(pos)))
        pos = match.end()
    tokens.append(Token("end", "", byte_of(len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed: tuple[str, ...]):
        self.text = text
        self.allowed = allowed
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, expected: str):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(tok.offset, f"expected {expected}, found {found}", self.text)

    def expect(self, text: str):
        if self.tok.text != text or self.tok.kind != "op":
            self.fail(repr(text))
        self.i += 1

    def parse(self) -> Node:
        node = self.expression(0)
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return node

    def expression(self, min_power: int) -> Node:
        lhs = self.prefix()
        while self.tok.kind == "op" and self.tok.text in BINARY:
            power, right_assoc = BINARY[self.tok.text]
            if power < min_power:
                break
            op = self.tok.text
            self.i += 1
            rhs = self.expression(power if right_assoc else power + 1)
            lhs = Bin(op, lhs, rhs)
        return lhs

    def prefix(self) -> Node:
        tok = self.tok
        if tok.kind == "op" and tok.text == "-":
            self.i += 1
            return Neg(self.expression(UNARY_MINUS_POWER))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expression(0)
            self.expect(")")
            return node
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in self.allowed:
                return Var(tok.text)
            raise UnknownIdentifierError(tok.text, tok.offset)
        self.fail("a number, name, '(' or '-'")


def parse(text: str, dim: int = 1, variables: tuple[str, ...] | None = None) -> Node:
    """Parse ``text``; identifiers must be functions, constants or ``variables``.

    ``variables`` defaults to the kernel variables of ``dim`` (``x, s`` or
    ``x1, x2, s1, s2``).
    """
    if not text or not text.strip():
        raise ExprSyntaxError(0, "empty expression", text or "")
    allowed = variables if variables is not None else variables_for(dim)
    return _Parser(text, tuple(allowed)).parse()


def to_string(node: Node) -> str:
    """Fully parenthesised source text that parses back to ``node``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_string(node.arg)})"
    return f"({to_string(node.left)} {node.op} {to_string(node.right)})"


def free_variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    if isinstance(node, Bin):
        return free_variables(node.left) | free_variables(node.right)
    return set()


def _power(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bad_branch = (a < 0) & (b != np.round(b))
    if np.any(bad_branch):
        raise DomainError("negative base raised to a non-integer power")
    if np.any((a == 0) & (b < 0)):
        raise DomainError("zero raised to a negative power")
    with np.errstate(over="ignore"):
        return np.power(a, b)


def evaluate(node: Node, bindings: dict):
    """Evaluate with ``bindings`` mapping variable names to floats or arrays."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            return bindings[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, bindings)
    if isinstance(node, Call):
        arg = np.asarray(evaluate(node.arg, bindings), dtype=float)
        if node.fn == "log" and np.any(arg <= 0):
            raise DomainError("log of a nonpositive value")
        if node.fn == "sqrt" and np.any(arg < 0):
            raise DomainError("sqrt of a negative value")
        with np.errstate(over="ignore"):
            out = FUNCTIONS[node.fn](arg)
        return float(out) if out.ndim == 0 else out
    left = evaluate(node.left, bindings)
    right = evaluate(node.right, bindings)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise DomainError("division by zero")
        out = np.true_divide(left, right)
        return float(out) if np.ndim(out) == 0 else out
    if node.op == "^":
        out = _power(left, right)
        return float(out) if np.ndim(out) == 0 else out
    raise ExprEvalError(f"unknown operator {node.op!r}")
