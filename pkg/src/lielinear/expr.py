"""Expression language for control-map entries.

Grammar::

    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := "-" factor | primary
    primary := NUMBER | "pi" | VAR | FUNC "(" expr ")" | "(" expr ")"
    VAR     := "u" [1-9][0-9]*
    FUNC    := "sin" | "cos" | "exp"

Expressions are evaluated either on floats or on :class:`DualScalar`
values, which carry the exact gradient with respect to the controls.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class VariableIndexError(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Pi, Var, Neg, BinOp, Call]

FUNCTIONS = ("sin", "cos", "exp")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"u([1-9][0-9]*)\Z")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", len(src[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), len(src[:pos].encode())))
        pos = m.end()
    tokens.append(("end", "", len(src.encode())))
    return tokens


class _Parser:
    def __init__(self, src: str, m: int):
        self.tokens = _tokenize(src)
        self.i = 0
        self.m = m

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.take()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", offset)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        return self.primary()

    def primary(self) -> Expr:
        kind, value, offset = self.take()
        if kind == "number":
            x = float(value)
            if not math.isfinite(x):
                raise ExprSyntaxError(f"numeric literal {value!r} overflows", offset)
            return Num(x)
        if kind == "ident":
            if value == "pi":
                return Pi()
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            var = _VAR.match(value)
            if var:
                index = int(var.group(1))
                if index > self.m:
                    raise VariableIndexError(
                        f"unknown variable {value!r} (control dimension is {self.m})", offset
                    )
                return Var(index)
            raise UnknownIdentifierError(f"unknown identifier {value!r}", offset)
        if (kind, value) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", offset)


def parse_expression(src: str, m: int) -> Expr:
    """Parse ``src`` into an AST; variables ``u1..um`` are allowed.

    Raises :class:`ExprSyntaxError` (with a byte offset) on malformed input.
    """
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(src, m)
    node = parser.expr()
    kind, value, offset = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {value!r}", offset)
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 4


def to_source(e: Expr) -> str:
    """Print an AST back to source with the minimal parentheses."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return f"u{e.index}"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        return f"-({inner})" if _prec(e.operand) < 3 else f"-{inner}"
    p = _PREC[e.op]
    left = to_source(e.left)
    right = to_source(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def max_variable(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Neg):
        return max_variable(e.operand)
    if isinstance(e, Call):
        return max_variable(e.arg)
    if isinstance(e, BinOp):
        return max(max_variable(e.left), max_variable(e.right))
    return 0


@dataclass(frozen=True)
class DualScalar:
    """Value together with its gradient with respect to the controls."""

    value: float
    derivative: np.ndarray

    def __add__(self, other: "DualScalar") -> "DualScalar":
        return DualScalar(self.value + other.value, self.derivative + other.derivative)

    def __sub__(self, other: "DualScalar") -> "DualScalar":
        return DualScalar(self.value - other.value, self.derivative - other.derivative)

    def __mul__(self, other: "DualScalar") -> "DualScalar":
        return DualScalar(
            self.value * other.value,
            self.value * other.derivative + other.value * self.derivative,
        )

    def __truediv__(self, other: "DualScalar") -> "DualScalar":
        if other.value == 0.0:
            raise EvaluationError("division by zero")
        q = self.value / other.value
        return DualScalar(q, (self.derivative - q * other.derivative) / other.value)

    def __neg__(self) -> "DualScalar":
        return DualScalar(-self.value, -self.derivative)


def _dual_call(func: str, x: DualScalar) -> DualScalar:
    if func == "sin":
        return DualScalar(math.sin(x.value), math.cos(x.value) * x.derivative)
    if func == "cos":
        return DualScalar(math.cos(x.value), -math.sin(x.value) * x.derivative)
    v = math.exp(x.value)
    return DualScalar(v, v * x.derivative)


_REAL_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


def _check_controls(u, e: Expr) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if max_variable(e) > len(u):
        raise ValueError(f"expression uses u{max_variable(e)} but only {len(u)} controls were given")
    return u


def _eval(e: Expr, u: np.ndarray) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        return float(u[e.index - 1])
    if isinstance(e, Neg):
        return -_eval(e.operand, u)
    if isinstance(e, Call):
        try:
            return _REAL_FUNCS[e.func](_eval(e.arg, u))
        except OverflowError as exc:
            raise EvaluationError(f"{e.func} overflow") from exc
    a = _eval(e.left, u)
    b = _eval(e.right, u)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0.0:
        raise EvaluationError("division by zero")
    return a / b


def evaluate(e: Expr, u) -> float:
    return _eval(e, _check_controls(u, e))


def _eval_dual(e: Expr, u: np.ndarray, zero: np.ndarray) -> DualScalar:
    if isinstance(e, Num):
        return DualScalar(e.value, zero)
    if isinstance(e, Pi):
        return DualScalar(math.pi, zero)
    if isinstance(e, Var):
        d = zero.copy()
        d[e.index - 1] = 1.0
        return DualScalar(float(u[e.index - 1]), d)
    if isinstance(e, Neg):
        return -_eval_dual(e.operand, u, zero)
    if isinstance(e, Call):
        try:
            return _dual_call(e.func, _eval_dual(e.arg, u, zero))
        except OverflowError as exc:
            raise EvaluationError(f"{e.func} overflow") from exc
    a = _eval_dual(e.left, u, zero)
    b = _eval_dual(e.right, u, zero)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return a / b


def evaluate_dual(e: Expr, u) -> DualScalar:
    """Evaluate ``e`` at ``u`` together with its exact gradient in ``u``."""
    u = _check_controls(u, e)
    return _eval_dual(e, u, np.zeros(len(u)))


def _py(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Pi):
        return "_pi"
    if isinstance(e, Var):
        return f"u[{e.index - 1}]"
    if isinstance(e, Neg):
        return f"(-{_py(e.operand)})"
    if isinstance(e, Call):
        return f"_{e.func}({_py(e.arg)})"
    return f"({_py(e.left)} {e.op} {_py(e.right)})"


_NAMESPACE = {"_pi": math.pi, "_sin": math.sin, "_cos": math.cos, "_exp": math.exp}


def compile_grid(grid) -> "Callable[[Sequence[float]], list[list[float]]]":
    """Compile a grid of expressions into one fast function of the controls.

    Semantics match :func:`evaluate` (including :class:`EvaluationError`).
    The generated code is built from the AST only, never from user text.
    """
    rows = ", ".join("[" + ", ".join(_py(e) for e in row) + "]" for row in grid)
    fn = eval(f"lambda u: [{rows}]", dict(_NAMESPACE))  # noqa: S307

    def run(u):
        try:
            return fn(u)
        except ZeroDivisionError as exc:
            raise EvaluationError("division by zero") from exc
        except OverflowError as exc:
            raise EvaluationError("overflow") from exc

    return run
