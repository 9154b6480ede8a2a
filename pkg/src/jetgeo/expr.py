"""Symbolic expressions over the jet chart (t, x1..xn, x1_1..x1_n).

Trees are immutable and canonical: every constructor folds constants and
drops additive/multiplicative identities, so structural equality is the
equality of folded trees.  Nothing beyond that is simplified.

Grammar (``^`` binds tighter than unary minus)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | symbol | symbol "(" expr ")" | "(" expr ")"
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Union

import numpy as np

from .errors import DomainError, ParseError, UnboundSymbolError

__all__ = [
    "Expr",
    "FUNCTIONS",
    "ZERO",
    "ONE",
    "const",
    "symbol",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "power",
    "neg",
    "call",
    "as_expr",
    "parse",
    "diff",
    "evaluate",
    "evaluate_array",
    "free_symbols",
    "is_variable_name",
]

Number = Union[int, float]

_VARIABLE_RE = re.compile(r"t|x\d+|x1_\d+")

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}

_NP_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}

# binding strength used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3
_ATOM_PREC = 5


def is_variable_name(name: str) -> bool:
    """True for chart coordinates (t, xi, x1_i); every other symbol is a parameter."""
    return _VARIABLE_RE.fullmatch(name) is not None


@dataclass(frozen=True, slots=True, eq=False)
class Expr:
    """A node of an expression tree.

    ``kind`` is one of ``const``, ``var``, ``param``, ``unary``, ``binary``
    and ``call``.  ``payload`` holds the numeric value, the symbol name,
    the operator character or the function name respectively.
    """

    kind: str
    payload: float | str
    children: tuple[Expr, ...] = ()
    _hash: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.kind, self.payload, self.children)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.kind == other.kind
            and self.payload == other.payload
            and self.children == other.children
        )

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"

    def __str__(self) -> str:
        return _format(self)

    @property
    def is_const(self) -> bool:
        return self.kind == "const"

    @property
    def value(self) -> float:
        if self.kind != "const":
            raise TypeError(f"{self} is not a constant")
        return self.payload  # type: ignore[return-value]

    def is_number(self, v: float) -> bool:
        return self.kind == "const" and self.payload == v

    @property
    def symbols(self) -> frozenset[str]:
        return free_symbols(self)

    def walk(self) -> Iterator[Expr]:
        yield self
        for c in self.children:
            yield from c.walk()

    # arithmetic sugar, routed through the folding constructors
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def __neg__(self):
        return neg(self)


# ---------------------------------------------------------------------------
# constructors with constant folding


def const(v: Number) -> Expr:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {v}")
    return Expr("const", v)


ZERO = const(0)
ONE = const(1)


def symbol(name: str) -> Expr:
    if name in FUNCTIONS:
        raise ValueError(f"{name!r} is a function name")
    return Expr("var" if is_variable_name(name) else "param", name)


def var(name: str) -> Expr:
    if not is_variable_name(name):
        raise ValueError(f"{name!r} is not a chart variable")
    return Expr("var", name)


def as_expr(obj: Expr | Number | str) -> Expr:
    """Coerce an Expr, a number or expression text to an Expr."""
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, str):
        return parse(obj)
    if isinstance(obj, (int, float, np.floating, np.integer)) and not isinstance(obj, bool):
        return const(obj)
    raise TypeError(f"cannot build an expression from {obj!r}")


def _fold(v: float) -> Expr | None:
    return const(v) if math.isfinite(v) else None


def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        folded = _fold(a.value + b.value)
        if folded is not None:
            return folded
    if a.is_number(0):
        return b
    if b.is_number(0):
        return a
    return Expr("binary", "+", (a, b))


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        folded = _fold(a.value - b.value)
        if folded is not None:
            return folded
    if b.is_number(0):
        return a
    if a.is_number(0):
        return neg(b)
    return Expr("binary", "-", (a, b))


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        folded = _fold(a.value * b.value)
        if folded is not None:
            return folded
    if a.is_number(0) or b.is_number(0):
        return ZERO
    if a.is_number(1):
        return b
    if b.is_number(1):
        return a
    return Expr("binary", "*", (a, b))


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const and b.value != 0:
        folded = _fold(a.value / b.value)
        if folded is not None:
            return folded
    if b.is_number(1):
        return a
    if a.is_number(0) and not b.is_number(0):
        return ZERO
    return Expr("binary", "/", (a, b))


def power(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_const and b.is_const:
        try:
            folded = _fold(_real_pow(a.value, b.value))
        except (ValueError, OverflowError, ZeroDivisionError):
            folded = None
        if folded is not None:
            return folded
    if b.is_number(0):
        return ONE
    if b.is_number(1) or a.is_number(1):
        return a
    return Expr("binary", "^", (a, b))


def neg(a) -> Expr:
    a = as_expr(a)
    if a.is_const:
        return const(-a.value)
    if a.kind == "unary":
        return a.children[0]
    return Expr("unary", "-", (a,))


def call(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unsupported function {name!r}")
    arg = as_expr(arg)
    if arg.is_const:
        try:
            folded = _fold(FUNCTIONS[name](arg.value))
        except (ValueError, OverflowError):
            folded = None
        if folded is not None:
            return folded
    return Expr("call", name, (arg,))


def _real_pow(base: float, exponent: float) -> float:
    if base < 0 and not float(exponent).is_integer():
        raise ValueError("negative base with non-integer exponent")
    if base == 0 and exponent < 0:
        raise ZeroDivisionError("zero to a negative power")
    return math.pow(base, exponent)


# ---------------------------------------------------------------------------
# printing


def _prec(e: Expr) -> int:
    if e.kind == "binary":
        return _PREC[e.payload]  # type: ignore[index]
    if e.kind == "unary":
        return _UNARY_PREC
    if e.kind == "const" and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _UNARY_PREC
    return _ATOM_PREC


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _paren(s: str) -> str:
    return "(" + s + ")"


def _format(e: Expr) -> str:
    kind = e.kind
    if kind == "const":
        return _format_number(e.payload)  # type: ignore[arg-type]
    if kind in ("var", "param"):
        return e.payload  # type: ignore[return-value]
    if kind == "call":
        return f"{e.payload}({_format(e.children[0])})"
    if kind == "unary":
        (c,) = e.children
        s = _format(c)
        return "-" + (_paren(s) if _prec(c) <= _UNARY_PREC else s)
    op = e.payload
    a, b = e.children
    p = _PREC[op]  # type: ignore[index]
    left, right = _format(a), _format(b)
    if op == "^":
        if _prec(a) <= p:
            left = _paren(left)
        if _prec(b) < _UNARY_PREC or (b.kind == "const" and _prec(b) == _UNARY_PREC):
            right = _paren(right)
    else:
        if _prec(a) < p:
            left = _paren(left)
        if _prec(b) <= p or _prec(b) == _UNARY_PREC:
            right = _paren(right)
    return f"{left}{op}{right}"


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN_RE.match(source, pos)
            if m is None:
                raise ParseError(f"unexpected character {source[pos]!r}", self._byte(pos))
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))  # type: ignore[arg-type]
            pos = m.end()
        self.tokens.append(("end", "", len(source)))
        self.i = 0

    def _byte(self, pos: int) -> int:
        return len(self.source[:pos].encode("utf-8"))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str) -> ParseError:
        kind, text, pos = self.peek()
        what = "end of input" if kind == "end" else f"token {text!r}"
        return ParseError(f"unexpected {what}", self._byte(pos), expected)

    def expect(self, text: str) -> None:
        if self.peek()[1] != text or self.peek()[0] != "op":
            raise self.fail(repr(text))
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.fail("operator or end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return power(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "number":
            self.take()
            return const(float(text))
        if kind == "name":
            self.take()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return call(text, arg)
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                raise ParseError(f"unknown function {text!r}", self._byte(pos),
                                 "one of " + ", ".join(sorted(FUNCTIONS)))
            return symbol(text)
        if kind == "op" and text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail("number, symbol or '('")


def parse(source: str) -> Expr:
    """Parse expression text into a canonical tree.

    >>> str(parse("omega^2 * x1"))
    'omega^2*x1'
    """
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# differentiation


@functools.lru_cache(maxsize=None)
def free_symbols(e: Expr) -> frozenset[str]:
    if e.kind in ("var", "param"):
        return frozenset((e.payload,))  # type: ignore[arg-type]
    out: frozenset[str] = frozenset()
    for c in e.children:
        out |= free_symbols(c)
    return out


def diff(e: Expr | str, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``v``."""
    return _diff(as_expr(e), v)


@functools.lru_cache(maxsize=None)
def _diff(e: Expr, v: str) -> Expr:
    if v not in free_symbols(e):
        return ZERO
    kind = e.kind
    if kind in ("var", "param"):
        return ONE
    if kind == "unary":
        return neg(_diff(e.children[0], v))
    if kind == "call":
        (a,) = e.children
        da = _diff(a, v)
        name = e.payload
        if name == "sin":
            outer = call("cos", a)
        elif name == "cos":
            outer = neg(call("sin", a))
        elif name == "tan":
            outer = div(ONE, power(call("cos", a), 2))
        elif name == "exp":
            outer = e
        elif name == "log":
            return div(da, a)
        else:  # sqrt
            return div(da, mul(2, e))
        return mul(outer, da)

    op = e.payload
    a, b = e.children
    da, db = _diff(a, v), _diff(b, v)
    if op == "+":
        return add(da, db)
    if op == "-":
        return sub(da, db)
    if op == "*":
        return add(mul(da, b), mul(a, db))
    if op == "/":
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    # op == "^"
    if v not in free_symbols(b):
        return mul(mul(b, power(a, sub(b, 1))), da)
    return mul(e, add(mul(db, call("log", a)), div(mul(b, da), a)))


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr | str, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` in IEEE double precision.

    Raises UnboundSymbolError for a missing symbol and DomainError for
    real-arithmetic violations, naming the failing subexpression.
    """
    return _eval(as_expr(e), bindings)


def _eval(e: Expr, b: Mapping[str, float]) -> float:
    kind = e.kind
    if kind == "const":
        return e.payload  # type: ignore[return-value]
    if kind in ("var", "param"):
        try:
            return float(b[e.payload])  # type: ignore[index]
        except KeyError:
            raise UnboundSymbolError(e.payload) from None  # type: ignore[arg-type]
    if kind == "unary":
        return -_eval(e.children[0], b)
    if kind == "call":
        x = _eval(e.children[0], b)
        name = e.payload
        if name == "log" and x <= 0:
            raise DomainError("log of non-positive value", str(e))
        if name == "sqrt" and x < 0:
            raise DomainError("sqrt of negative value", str(e))
        try:
            return FUNCTIONS[name](x)  # type: ignore[index]
        except (ValueError, OverflowError) as exc:
            raise DomainError(str(exc), str(e)) from None

    op = e.payload
    x = _eval(e.children[0], b)
    y = _eval(e.children[1], b)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "/":
        if y == 0:
            raise DomainError("division by zero", str(e))
        return x / y
    try:
        return _real_pow(x, y)
    except ZeroDivisionError:
        raise DomainError("division by zero", str(e)) from None
    except ValueError as exc:
        raise DomainError(str(exc), str(e)) from None
    except OverflowError:
        raise DomainError("overflow", str(e)) from None


def evaluate_array(e: Expr | str, bindings: Mapping[str, np.ndarray | float]) -> np.ndarray:
    """Vectorised evaluation over arrays of sample values (used along curves)."""
    with np.errstate(all="ignore"):
        out = _eval_np(as_expr(e), bindings)
    shape = np.broadcast_shapes(*(np.shape(v) for v in bindings.values())) if bindings else ()
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


def _eval_np(e: Expr, b):
    kind = e.kind
    if kind == "const":
        return e.payload
    if kind in ("var", "param"):
        try:
            return np.asarray(b[e.payload], dtype=float)
        except KeyError:
            raise UnboundSymbolError(e.payload) from None
    if kind == "unary":
        return -_eval_np(e.children[0], b)
    if kind == "call":
        x = _eval_np(e.children[0], b)
        name = e.payload
        if name == "log" and np.any(np.asarray(x) <= 0):
            raise DomainError("log of non-positive value", str(e))
        if name == "sqrt" and np.any(np.asarray(x) < 0):
            raise DomainError("sqrt of negative value", str(e))
        return _NP_FUNCTIONS[name](x)
    op = e.payload
    x = _eval_np(e.children[0], b)
    y = _eval_np(e.children[1], b)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "/":
        if np.any(np.asarray(y) == 0):
            raise DomainError("division by zero", str(e))
        return x / y
    xa, ya = np.asarray(x), np.asarray(y)
    if np.any((xa < 0) & (np.floor(ya) != ya)):
        raise DomainError("negative base with non-integer exponent", str(e))
    if np.any((xa == 0) & (ya < 0)):
        raise DomainError("division by zero", str(e))
    return np.power(x, y)
