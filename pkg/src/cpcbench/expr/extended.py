"""Arbitrary-precision interpreter built on mpmath.

Runs the same instruction program as the binary64 backend, with every
operation carried out at ``digits`` significant decimal digits. Each thread
gets its own mpmath context, so concurrent calls never touch the global
``mpmath.mp`` precision.
"""

from __future__ import annotations

import threading
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

import mpmath

from .nodes import Tree
from .outcome import BaseValue, DimensionError, Feasible, Infeasible, Violation
from .program import OVERFLOW, Program

DEFAULT_DIGITS = 50

_local = threading.local()


def context(digits: int = DEFAULT_DIGITS) -> mpmath.ctx_mp.MPContext:
    """Thread-local mpmath context at ``digits`` decimal digits."""
    cache = getattr(_local, "contexts", None)
    if cache is None:
        cache = _local.contexts = {}
    ctx = cache.get(digits)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = digits
        cache[digits] = ctx
    return ctx


def to_mpf(ctx, c, coords: str = "exact"):
    """Convert one coordinate.

    ``coords="exact"`` reads decimal strings literally (to working precision);
    ``coords="binary64"`` first rounds them to the nearest double, i.e. the
    point a double-precision solver actually held. Floats are always taken at
    their exact binary value.
    """
    if isinstance(c, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(c, Fraction):
        return ctx.mpf(c.numerator) / c.denominator
    if isinstance(c, (str, Decimal)):
        s = str(c).strip()
        if coords == "binary64":
            return ctx.mpf(float(s))
        if coords != "exact":
            raise ValueError(f"unknown coordinate mode {coords!r}")
        return ctx.mpf(s)
    if isinstance(c, (int, float)):
        return ctx.mpf(c)
    return ctx.mpf(c)


def _run(prog: Program, x: list, ctx):
    vals: list = [None] * prog.n_slots
    oks: list = [True] * prog.n_slots
    conds = prog.conditions
    observed = [None] * len(conds)
    nan = ctx.nan
    for ins in prog.instrs:
        op = ins.op
        args = ins.args
        ok = True
        if op == "var":
            v = x[ins.payload]
        elif op == "const":
            q = ins.payload
            v = ctx.mpf(q.numerator) / q.denominator if q.denominator != 1 else ctx.mpf(q.numerator)
        elif op == "pi":
            v = +ctx.pi
        else:
            ok = all(oks[s] for s in args)
            if ins.cond >= 0:
                operand = prog.cond_operand[ins.cond]
                if oks[operand]:
                    u = vals[operand]
                    sat = bool(conds[ins.cond].holds(u))
                    observed[ins.cond] = (u, sat, True)
                else:
                    observed[ins.cond] = (None, None, False)
                    sat = False
                ok = ok and sat
            if not ok:
                v = nan
            else:
                a = vals[args[0]]
                if op == "add":
                    v = a + vals[args[1]]
                elif op == "sub":
                    v = a - vals[args[1]]
                elif op == "mul":
                    v = a * vals[args[1]]
                elif op == "div":
                    v = a / vals[args[1]]
                elif op == "pow":
                    num, den = ins.payload
                    if den == 1:
                        v = a**num
                    elif a == 0:
                        v = ctx.zero  # p > 0 here: negative p requires a > 0
                    else:
                        v = ctx.power(a, ctx.mpf(num) / den)
                elif op == "neg":
                    v = -a
                elif op == "sin":
                    v = ctx.sin(a)
                elif op == "cos":
                    v = ctx.cos(a)
                elif op == "exp":
                    v = ctx.exp(a)
                elif op == "ln":
                    v = ctx.ln(a)
                elif op == "abs":
                    v = abs(a)
                elif op == "floor":
                    v = ctx.floor(a)
                elif op == "sign":
                    v = ctx.sign(a)
                elif op == "select":
                    v = vals[args[2]] if a < vals[args[1]] else vals[args[3]]
                else:  # pragma: no cover
                    raise ValueError(f"unknown op {op}")
        vals[ins.out] = v
        oks[ins.out] = ok
        for r in ins.release:
            vals[r] = None
    return vals[prog.result], oks[prog.result], observed


def _prepare(tree: Tree, x: Sequence, digits: int, coords: str):
    if isinstance(x, (str, bytes)):
        raise TypeError("x must be a sequence of coordinates")
    if digits < 1:
        raise ValueError("digits must be positive")
    x = list(x)
    if len(x) != tree.dim:
        raise DimensionError(f"expected {tree.dim} coordinates, got {len(x)}")
    ctx = context(digits)
    return ctx, [to_mpf(ctx, c, coords) for c in x]


def eval_extended(
    tree: Tree, x: Sequence, digits: int = DEFAULT_DIGITS, coords: str = "exact"
) -> Feasible | Infeasible:
    """Evaluate ``tree`` at ``x`` with ``digits`` significant decimal digits.

    Same domain semantics as :func:`~cpcbench.expr.machine.eval_machine`;
    feasible values are returned as mpmath ``mpf`` numbers.
    """
    ctx, xs = _prepare(tree, x, digits, coords)
    value, ok, observed = _run(tree.program, xs, ctx)
    violations = []
    for cond, (u, sat, operand_ok) in zip(tree.program.conditions, observed):
        if not operand_ok:
            violations.append(Violation(cond, None))
        elif not sat:
            violations.append(Violation(cond, u))
    if violations:
        return Infeasible(tuple(violations))
    if not ctx.isfinite(value):
        return Infeasible((Violation(OVERFLOW, value),))
    return Feasible(value)


def base_values_extended(
    tree: Tree, x: Sequence, digits: int = DEFAULT_DIGITS, coords: str = "exact"
) -> list[BaseValue]:
    ctx, xs = _prepare(tree, x, digits, coords)
    _, _, observed = _run(tree.program, xs, ctx)
    return [
        BaseValue(cond, u if operand_ok else None, sat if operand_ok else None)
        for cond, (u, sat, operand_ok) in zip(tree.program.conditions, observed)
    ]
