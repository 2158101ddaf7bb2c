"""Immutable expression-tree nodes.

Trees are built from frozen dataclasses, so two trees compare equal exactly
when they are structurally identical. Arithmetic operators are overloaded on
:class:`Node` to make hand-written builders read like the formulas they
encode::

    x1, x2 = var(0), var(1)
    tree = Tree(ln(x1 - 2 * x2 ** 2), dim=2)

Constants are exact rationals (:class:`fractions.Fraction`); the machine
backend rounds them to binary64 once, the extended backend evaluates them at
working precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterator, Union


class Node:
    """Base class of all expression nodes."""

    __slots__ = ()

    def children(self) -> tuple["Node", ...]:
        return ()

    def __add__(self, other):
        return Add(self, as_node(other))

    def __radd__(self, other):
        return Add(as_node(other), self)

    def __sub__(self, other):
        return Sub(self, as_node(other))

    def __rsub__(self, other):
        return Sub(as_node(other), self)

    def __mul__(self, other):
        return Mul(self, as_node(other))

    def __rmul__(self, other):
        return Mul(as_node(other), self)

    def __truediv__(self, other):
        return Div(self, as_node(other))

    def __rtruediv__(self, other):
        return Div(as_node(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, p):
        return power(self, p)


@dataclass(frozen=True, eq=True)
class Const(Node):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", to_fraction(self.value))


@dataclass(frozen=True)
class Pi(Node):
    pass


@dataclass(frozen=True)
class Var(Node):
    """Coordinate ``x[index]`` (0-based)."""

    index: int


@dataclass(frozen=True)
class IndexedVar(Node):
    """Coordinate addressed through a summation index.

    Inside ``Sum(symbol, ...)`` this is ``x_{symbol + offset}`` in 1-based
    mathematical numbering, i.e. 0-based index ``value(symbol) + offset - 1``.
    """

    symbol: str
    offset: int = 0


@dataclass(frozen=True)
class Index(Node):
    """The integer value of a summation index."""

    symbol: str


@dataclass(frozen=True)
class Unary(Node):
    child: Node

    def children(self):
        return (self.child,)


class Neg(Unary):
    pass


class Sin(Unary):
    pass


class Cos(Unary):
    pass


class Exp(Unary):
    pass


class Ln(Unary):
    pass


class Abs(Unary):
    pass


class Floor(Unary):
    pass


class Sign(Unary):
    pass


# dataclass(frozen) on the base supplies __init__/__eq__; subclasses need
# their own decorator so that __eq__ also compares the concrete class.
for _cls in (Neg, Sin, Cos, Exp, Ln, Abs, Floor, Sign):
    dataclass(frozen=True)(_cls)


@dataclass(frozen=True)
class Binary(Node):
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)


class Add(Binary):
    pass


class Sub(Binary):
    pass


class Mul(Binary):
    pass


class Div(Binary):
    pass


for _cls in (Add, Sub, Mul, Div):
    dataclass(frozen=True)(_cls)


@dataclass(frozen=True)
class Pow(Node):
    """``base ** (num/den)`` with the exponent kept as an exact rational."""

    base: Node
    num: int
    den: int = 1

    def __post_init__(self):
        if self.den == 0:
            raise ValueError("exponent denominator must be non-zero")
        q = Fraction(self.num, self.den)
        object.__setattr__(self, "num", q.numerator)
        object.__setattr__(self, "den", q.denominator)

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def is_integer(self) -> bool:
        return self.den == 1

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Sum(Node):
    """``sum(body for symbol in range(lower, upper + 1))``; bounds inclusive."""

    symbol: str
    lower: int
    upper: int
    body: Node

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Select(Node):
    """Piecewise choice: ``if_less`` where ``left < right``, else ``otherwise``.

    Only used by the classical comparator functions; every operand is
    evaluated (there is no short-circuit).
    """

    left: Node
    right: Node
    if_less: Node
    otherwise: Node

    def children(self):
        return (self.left, self.right, self.if_less, self.otherwise)


Number = Union[int, float, str, Fraction, Decimal]


def to_fraction(value: Number) -> Fraction:
    """Exact rational for ``value``; strings are read as exact decimals."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a numeric constant")
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, float):
        # Floats written in source are meant as the decimal they print as.
        return Fraction(repr(value))
    if isinstance(value, str):
        t = value.strip()
        if "/" in t:
            return Fraction(t)
        return Fraction(Decimal(t))
    raise TypeError(f"cannot make a constant from {type(value).__name__}")


def as_node(value) -> Node:
    if isinstance(value, Node):
        return value
    return Const(to_fraction(value))


def const(value: Number) -> Const:
    return Const(to_fraction(value))


def var(index: int) -> Var:
    return Var(index)


def power(base, p) -> Pow:
    """``base ** p`` where ``p`` is an int, a Fraction, a decimal string or a
    ``(num, den)`` pair. Floats are read through their decimal repr so that
    ``0.2`` and ``Fraction(1, 5)`` give the same node."""
    if isinstance(p, tuple):
        q = Fraction(*p)
    else:
        q = to_fraction(p)
    return Pow(as_node(base), q.numerator, q.denominator)


def sqrt(x) -> Pow:
    return Pow(as_node(x), 1, 2)


def ln(x) -> Ln:
    return Ln(as_node(x))


def sin(x) -> Sin:
    return Sin(as_node(x))


def cos(x) -> Cos:
    return Cos(as_node(x))


def exp(x) -> Exp:
    return Exp(as_node(x))


def fabs(x) -> Abs:
    return Abs(as_node(x))


def floor(x) -> Floor:
    return Floor(as_node(x))


def sign(x) -> Sign:
    return Sign(as_node(x))


PI = Pi()


def iter_nodes(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


class Tree:
    """An expression together with the dimension of its input vector.

    Node ids are pre-order positions, so they are stable for a given tree and
    remain unique when a subtree object is shared between several parents.
    """

    __slots__ = ("root", "dim", "_program")

    def __init__(self, root: Node, dim: int):
        root = as_node(root)
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        self.root = root
        self.dim = int(dim)
        self._program = None
        _check_vars(root, self.dim, {})

    @property
    def program(self):
        if self._program is None:
            from .program import compile_tree

            self._program = compile_tree(self)
        return self._program

    def __eq__(self, other):
        return isinstance(other, Tree) and self.dim == other.dim and self.root == other.root

    def __hash__(self):
        return hash((self.root, self.dim))

    def __repr__(self):
        from .sexpr import to_sexpr

        return f"Tree(dim={self.dim}, {to_sexpr(self.root)})"

    def __getstate__(self):
        return {"root": self.root, "dim": self.dim}

    def __setstate__(self, state):
        self.root = state["root"]
        self.dim = state["dim"]
        self._program = None


def _check_vars(node: Node, dim: int, env: dict[str, int]) -> None:
    if isinstance(node, Var):
        if not 0 <= node.index < dim:
            raise IndexError(f"variable x{node.index + 1} outside dimension {dim}")
    elif isinstance(node, IndexedVar):
        if node.symbol not in env:
            raise NameError(f"index symbol {node.symbol!r} is not bound by a sum")
    elif isinstance(node, Index):
        if node.symbol not in env:
            raise NameError(f"index symbol {node.symbol!r} is not bound by a sum")
    elif isinstance(node, Sum):
        for i in range(node.lower, node.upper + 1):
            _check_vars(node.body, dim, {**env, node.symbol: i})
        return
    if isinstance(node, IndexedVar):
        k = env[node.symbol] + node.offset - 1
        if not 0 <= k < dim:
            raise IndexError(
                f"x_({node.symbol}{node.offset:+d}) = x{k + 1} outside dimension {dim}"
            )
    for c in node.children():
        _check_vars(c, dim, env)
