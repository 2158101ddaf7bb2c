"""Lowering of expression trees to a flat post-order instruction list.

Both interpreters execute the same :class:`Program`, which is what keeps their
domain semantics identical: every domain-restricted operation is tagged with
the :class:`DomainCondition` it must satisfy, and conditions are numbered in
the order their operations execute (children left to right, then parent).
Sums are unrolled here; the body's conditions repeat once per index value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from . import nodes as N


class ConditionKind(enum.Enum):
    LOG_POSITIVITY = "LogPositivity"  # ln(u): u > 0
    FRAC_POW_NON_NEGATIVE = "FracPowNonNegative"  # u^p, p > 0 non-integer: u >= 0
    FRAC_POW_POSITIVE = "FracPowPositive"  # u^p, p < 0 non-integer: u > 0
    INT_POW_NON_ZERO = "IntPowNonZero"  # u^p, p < 0 integer: u != 0
    DIV_NON_ZERO = "DivNonZero"  # a / u: u != 0
    OVERFLOW = "Overflow"  # non-finite result with all conditions met

    @property
    def relation(self) -> str:
        return _RELATION[self]


_RELATION = {
    ConditionKind.LOG_POSITIVITY: "> 0",
    ConditionKind.FRAC_POW_NON_NEGATIVE: ">= 0",
    ConditionKind.FRAC_POW_POSITIVE: "> 0",
    ConditionKind.INT_POW_NON_ZERO: "!= 0",
    ConditionKind.DIV_NON_ZERO: "!= 0",
    ConditionKind.OVERFLOW: "finite",
}


@dataclass(frozen=True)
class DomainCondition:
    """A requirement on the operand ("base term") of one operation."""

    index: int
    node_id: int
    kind: ConditionKind
    label: str
    exponent: Fraction | None = None
    binding: tuple[tuple[str, int], ...] = ()

    def holds(self, u) -> bool:
        """Check the condition on a scalar operand (float or mpf)."""
        k = self.kind
        if k is ConditionKind.FRAC_POW_NON_NEGATIVE:
            return u >= 0
        if k in (ConditionKind.LOG_POSITIVITY, ConditionKind.FRAC_POW_POSITIVE):
            return u > 0
        return u != 0

    def describe(self) -> str:
        s = f"{self.label}: {self.kind.value}"
        if self.exponent is not None:
            s += f"(p={self.exponent})"
        if self.binding:
            s += " [" + ", ".join(f"{k}={v}" for k, v in self.binding) + "]"
        return s


# Pseudo-condition reported when every domain check passes but the value is
# not finite (e.g. exp overflow in binary64).
OVERFLOW = DomainCondition(-1, -1, ConditionKind.OVERFLOW, "overflow")


def pow_condition(num: int, den: int) -> ConditionKind | None:
    if den == 1:
        return ConditionKind.INT_POW_NON_ZERO if num < 0 else None
    return ConditionKind.FRAC_POW_NON_NEGATIVE if num > 0 else ConditionKind.FRAC_POW_POSITIVE


@dataclass(frozen=True)
class Instr:
    op: str
    out: int
    args: tuple[int, ...]
    payload: object
    node_id: int
    cond: int  # index into Program.conditions, or -1
    release: tuple[int, ...] = ()


@dataclass
class Program:
    dim: int
    instrs: list[Instr]
    conditions: list[DomainCondition]
    n_slots: int
    result: int
    # cond index -> slot holding the checked operand (read before release)
    cond_operand: list[int] = field(default_factory=list)


_UNARY = {
    N.Neg: "neg",
    N.Sin: "sin",
    N.Cos: "cos",
    N.Exp: "exp",
    N.Ln: "ln",
    N.Abs: "abs",
    N.Floor: "floor",
    N.Sign: "sign",
}
_BINARY = {N.Add: "add", N.Sub: "sub", N.Mul: "mul", N.Div: "div"}


class _Compiler:
    def __init__(self, dim: int):
        self.dim = dim
        self.instrs: list[Instr] = []
        self.conditions: list[DomainCondition] = []
        self.cond_operand: list[int] = []
        self.n_slots = 0
        self.n_base = 0
        self.n_den = 0

    def _slot(self) -> int:
        s = self.n_slots
        self.n_slots += 1
        return s

    def _cond(self, node_id, kind, operand, exponent, env) -> int:
        if kind is ConditionKind.DIV_NON_ZERO:
            self.n_den += 1
            label = f"den_{self.n_den}"
        else:
            self.n_base += 1
            label = f"base_{self.n_base}"
        binding = tuple(sorted(env.items()))
        c = DomainCondition(len(self.conditions), node_id, kind, label, exponent, binding)
        self.conditions.append(c)
        self.cond_operand.append(operand)
        return c.index

    def _emit(self, op, args, payload, node_id, cond=-1) -> int:
        out = self._slot()
        self.instrs.append(Instr(op, out, tuple(args), payload, node_id, cond))
        return out

    def emit(self, node: N.Node, env: dict[str, int], node_id: int) -> int:
        # node ids are pre-order positions; children of a node with id k are
        # numbered after k, each subtree occupying a contiguous id range.
        if isinstance(node, N.Const):
            return self._emit("const", (), node.value, node_id)
        if isinstance(node, N.Pi):
            return self._emit("pi", (), None, node_id)
        if isinstance(node, N.Var):
            return self._emit("var", (), node.index, node_id)
        if isinstance(node, N.IndexedVar):
            return self._emit("var", (), env[node.symbol] + node.offset - 1, node_id)
        if isinstance(node, N.Index):
            return self._emit("const", (), Fraction(env[node.symbol]), node_id)
        op = _UNARY.get(type(node))
        if op is not None:
            a = self.emit(node.child, env, node_id + 1)
            cond = -1
            if op == "ln":
                cond = self._cond(node_id, ConditionKind.LOG_POSITIVITY, a, None, env)
            return self._emit(op, (a,), None, node_id, cond)
        op = _BINARY.get(type(node))
        if op is not None:
            a = self.emit(node.left, env, node_id + 1)
            b = self.emit(node.right, env, node_id + 1 + _size(node.left))
            cond = -1
            # a literal nonzero divisor can never violate the domain
            if op == "div" and not _nonzero_literal(node.right):
                cond = self._cond(node_id, ConditionKind.DIV_NON_ZERO, b, None, env)
            return self._emit(op, (a, b), None, node_id, cond)
        if isinstance(node, N.Pow):
            a = self.emit(node.base, env, node_id + 1)
            kind = pow_condition(node.num, node.den)
            cond = -1
            if kind is not None:
                cond = self._cond(node_id, kind, a, node.exponent, env)
            return self._emit("pow", (a,), (node.num, node.den), node_id, cond)
        if isinstance(node, N.Sum):
            acc = None
            for i in range(node.lower, node.upper + 1):
                term = self.emit(node.body, {**env, node.symbol: i}, node_id + 1)
                acc = term if acc is None else self._emit("add", (acc, term), None, node_id)
            if acc is None:
                acc = self._emit("const", (), Fraction(0), node_id)
            return acc
        if isinstance(node, N.Select):
            ids = node_id + 1
            slots = []
            for c in node.children():
                slots.append(self.emit(c, env, ids))
                ids += _size(c)
            return self._emit("select", slots, None, node_id)
        raise TypeError(f"unknown node type {type(node).__name__}")


def _nonzero_literal(node: N.Node) -> bool:
    return isinstance(node, N.Pi) or (isinstance(node, N.Const) and node.value != 0)


def _size(node: N.Node) -> int:
    return 1 + sum(_size(c) for c in node.children())


def compile_tree(tree) -> Program:
    comp = _Compiler(tree.dim)
    result = comp.emit(tree.root, {}, 0)
    instrs = comp.instrs
    # release each slot right after its last reader so batch evaluation keeps
    # only live arrays in memory
    last_use: dict[int, int] = {}
    for k, ins in enumerate(instrs):
        for a in ins.args:
            last_use[a] = k
    releases: dict[int, list[int]] = {}
    for slot, k in last_use.items():
        if slot != result:
            releases.setdefault(k, []).append(slot)
    instrs = [
        Instr(i.op, i.out, i.args, i.payload, i.node_id, i.cond, tuple(releases.get(k, ())))
        for k, i in enumerate(instrs)
    ]
    return Program(tree.dim, instrs, comp.conditions, comp.n_slots, result, comp.cond_operand)
