"""S-expression reader and printer for expression trees.

Grammar of expressions (``n`` is the problem dimension of scalable
functions, bound when the tree is built)::

    number              12, -0.495, 1e-3, 2/3 (exact rational literal)
    pi | n
    x1, x_1             coordinate, 1-based
    (x i [offset])      coordinate x_{i+offset} inside a sum over i
    (+ e e ...) (* e e ...) (- e) (- e e ...) (/ e e ...)
    (pow e num [den])   e ** (num/den), exponent kept exact
    (sqrt e) (ln e) (log e) (sin e) (cos e) (exp e) (abs e) (floor e) (sign e)
    (sum i lo hi e)     lo/hi are integer expressions in n, e.g. (- n 1)
    (if< a b then else) piecewise select

Comments run from ``;`` to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import nodes as N


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int
    quoted: bool = False


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


_TOKEN = re.compile(r'\s+|;[^\n]*|\(|\)|"(?:[^"\\]|\\.)*"|[^\s()";]+')


def read_all(text: str) -> list:
    """Parse ``text`` into a list of top-level data (:class:`Atom`/:class:`SList`)."""
    stack: list[tuple[list, int, int]] = [([], 0, 0)]
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("unterminated string", line, pos - line_start + 1)
        tok = m.group()
        col = pos - line_start + 1
        if tok == "(":
            stack.append(([], line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unexpected ')'", line, col)
            items, l0, c0 = stack.pop()
            stack[-1][0].append(SList(tuple(items), l0, c0))
        elif tok.startswith('"'):
            body = tok[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            stack[-1][0].append(Atom(body, line, col, quoted=True))
        elif not tok[0].isspace() and not tok.startswith(";"):
            stack[-1][0].append(Atom(tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    if len(stack) > 1:
        _, l0, c0 = stack[-1]
        raise ParseError("unclosed '('", l0, c0)
    return stack[0][0]


def read(text: str):
    data = read_all(text)
    if len(data) != 1:
        raise ParseError(f"expected one expression, found {len(data)}", 1, 1)
    return data[0]


_RATIONAL = re.compile(r"^[+-]?\d+/\d+$")
_VAR = re.compile(r"^x_?(\d+)$")
_UNARY = {
    "ln": N.Ln,
    "log": N.Ln,
    "sin": N.Sin,
    "cos": N.Cos,
    "exp": N.Exp,
    "abs": N.Abs,
    "floor": N.Floor,
    "sign": N.Sign,
}
_FOLD = {"+": N.Add, "*": N.Mul, "-": N.Sub, "/": N.Div}


def parse_number(text: str) -> Fraction | None:
    if _RATIONAL.match(text):
        num, den = text.split("/")
        if int(den) == 0:
            return None
        return Fraction(int(num), int(den))
    try:
        d = Decimal(text)
    except InvalidOperation:
        return None
    if not d.is_finite():
        return None
    return Fraction(d)


def _where(datum) -> tuple[int, int]:
    return datum.line, datum.col


def int_expr(datum, n: int | None) -> int:
    """Evaluate an integer bound such as ``(- n 1)``."""
    if isinstance(datum, Atom):
        if datum.text == "n":
            if n is None:
                raise ParseError("dimension n is not bound", *_where(datum))
            return n
        q = parse_number(datum.text)
        if q is None or q.denominator != 1:
            raise ParseError(f"expected an integer, got {datum.text!r}", *_where(datum))
        return int(q)
    if not datum.items or not isinstance(datum.items[0], Atom):
        raise ParseError("malformed integer expression", *_where(datum))
    head = datum.items[0].text
    vals = [int_expr(d, n) for d in datum.items[1:]]
    if not vals:
        raise ParseError("malformed integer expression", *_where(datum))
    if head == "+":
        return sum(vals)
    if head == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if head == "*":
        out = 1
        for v in vals:
            out *= v
        return out
    raise ParseError(f"unsupported integer operator {head!r}", *_where(datum))


def to_node(datum, n: int | None = None, _env: frozenset = frozenset()) -> N.Node:
    """Convert a parsed datum to a :class:`~cpcbench.expr.nodes.Node`."""
    if isinstance(datum, Atom):
        t = datum.text
        if datum.quoted:
            raise ParseError("string literal in expression", *_where(datum))
        if t == "pi":
            return N.PI
        if t in _env:
            return N.Index(t)
        if t == "n":
            if n is None:
                raise ParseError("dimension n is not bound", *_where(datum))
            return N.Const(Fraction(n))
        m = _VAR.match(t)
        if m:
            k = int(m.group(1))
            if k < 1:
                raise ParseError("variables are numbered from 1", *_where(datum))
            return N.Var(k - 1)
        q = parse_number(t)
        if q is None:
            raise ParseError(f"unknown symbol {t!r}", *_where(datum))
        return N.Const(q)

    items = datum.items
    if not items or not isinstance(items[0], Atom) or items[0].quoted:
        raise ParseError("expected an operator", *_where(datum))
    head = items[0].text
    args = items[1:]

    def sub(d):
        return to_node(d, n, _env)

    def arity(k_min, k_max=None):
        if len(args) < k_min or (k_max is not None and len(args) > k_max):
            want = f"{k_min}" if k_max == k_min else f"{k_min}..{k_max or 'many'}"
            raise ParseError(f"{head!r} takes {want} arguments, got {len(args)}", *_where(datum))

    if head in _UNARY:
        arity(1, 1)
        return _UNARY[head](sub(args[0]))
    if head == "sqrt":
        arity(1, 1)
        return N.Pow(sub(args[0]), 1, 2)
    if head == "-" and len(args) == 1:
        return N.Neg(sub(args[0]))
    if head in _FOLD:
        arity(2 if head in "-/" else 1)
        out = sub(args[0])
        for a in args[1:]:
            out = _FOLD[head](out, sub(a))
        return out
    if head == "pow":
        arity(2, 3)
        num = int_expr(args[1], n)
        den = int_expr(args[2], n) if len(args) == 3 else 1
        if den == 0:
            raise ParseError("exponent denominator is zero", *_where(args[2]))
        return N.Pow(sub(args[0]), num, den)
    if head == "x":
        arity(1, 2)
        if isinstance(args[0], Atom) and args[0].text in _env:
            off = int_expr(args[1], n) if len(args) == 2 else 0
            return N.IndexedVar(args[0].text, off)
        k = int_expr(args[0], n) + (int_expr(args[1], n) if len(args) == 2 else 0)
        if k < 1:
            raise ParseError("variables are numbered from 1", *_where(datum))
        return N.Var(k - 1)
    if head == "sum":
        arity(4, 4)
        sym = args[0]
        if not isinstance(sym, Atom) or not re.match(r"^[A-Za-z_]\w*$", sym.text):
            raise ParseError("sum index must be a symbol", *_where(datum))
        if sym.text in ("n", "pi") or _VAR.match(sym.text):
            raise ParseError(f"reserved name {sym.text!r} used as sum index", *_where(sym))
        lo = int_expr(args[1], n)
        hi = int_expr(args[2], n)
        body = to_node(args[3], n, _env | {sym.text})
        return N.Sum(sym.text, lo, hi, body)
    if head == "if<":
        arity(4, 4)
        return N.Select(*(sub(a) for a in args))
    raise ParseError(f"unknown operator {head!r}", *_where(datum))


def parse_expr(text: str, n: int | None = None) -> N.Node:
    return to_node(read(text), n)


def _num(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        s = format(Decimal(q.numerator) / Decimal(q.denominator), "f")
        return s
    return f"{q.numerator}/{q.denominator}"


_NAMES = {N.Ln: "ln", N.Sin: "sin", N.Cos: "cos", N.Exp: "exp", N.Abs: "abs",
          N.Floor: "floor", N.Sign: "sign", N.Neg: "-"}
_BIN_NAMES = {N.Add: "+", N.Sub: "-", N.Mul: "*", N.Div: "/"}


def to_sexpr(node: N.Node) -> str:
    """Inverse of :func:`parse_expr` (up to whitespace)."""
    if isinstance(node, N.Const):
        return _num(node.value)
    if isinstance(node, N.Pi):
        return "pi"
    if isinstance(node, N.Var):
        return f"x{node.index + 1}"
    if isinstance(node, N.IndexedVar):
        return f"(x {node.symbol} {node.offset})" if node.offset else f"(x {node.symbol})"
    if isinstance(node, N.Index):
        return node.symbol
    if type(node) in _NAMES:
        return f"({_NAMES[type(node)]} {to_sexpr(node.child)})"
    if type(node) in _BIN_NAMES:
        return f"({_BIN_NAMES[type(node)]} {to_sexpr(node.left)} {to_sexpr(node.right)})"
    if isinstance(node, N.Pow):
        if node.den == 1:
            return f"(pow {to_sexpr(node.base)} {node.num})"
        return f"(pow {to_sexpr(node.base)} {node.num} {node.den})"
    if isinstance(node, N.Sum):
        return f"(sum {node.symbol} {node.lower} {node.upper} {to_sexpr(node.body)})"
    if isinstance(node, N.Select):
        return "(if< " + " ".join(to_sexpr(c) for c in node.children()) + ")"
    raise TypeError(f"unknown node type {type(node).__name__}")
