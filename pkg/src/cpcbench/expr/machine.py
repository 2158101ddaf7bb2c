"""Binary64 interpreter.

A single vectorised interpreter serves both the per-point API
(:func:`eval_machine`, :func:`base_values`) and bulk evaluation
(:func:`evaluate_batch`), so a point is judged feasible by the Monte Carlo
sampler exactly when :func:`eval_machine` says so.
"""

from __future__ import annotations

import math
from decimal import Decimal
from typing import Sequence

import numpy as np

from .nodes import Tree
from .outcome import BaseValue, DimensionError, Feasible, Infeasible, Violation
from .program import OVERFLOW, ConditionKind, Program


def _check(kind: ConditionKind, u):
    if kind is ConditionKind.FRAC_POW_NON_NEGATIVE:
        return u >= 0
    if kind is ConditionKind.LOG_POSITIVITY or kind is ConditionKind.FRAC_POW_POSITIVE:
        return u > 0
    return u != 0


def _and(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a & b


def _run(prog: Program, X: np.ndarray, record: bool = False):
    """Execute ``prog`` on the rows of ``X``.

    Returns ``(values, ok, observed)`` where ``ok`` is the feasibility mask
    (``None`` meaning all rows feasible) and ``observed`` lists, per
    condition, ``(operand, satisfied, operand_ok)`` when ``record`` is set.
    """
    vals: list = [None] * prog.n_slots
    oks: list = [None] * prog.n_slots
    conds = prog.conditions
    observed = [None] * len(conds) if record else None
    with np.errstate(all="ignore"):
        for ins in prog.instrs:
            op = ins.op
            args = ins.args
            mask = None
            if op == "var":
                v = X[:, ins.payload]
            elif op == "const":
                v = np.float64(ins.payload)
            elif op == "pi":
                v = np.float64(math.pi)
            else:
                a = vals[args[0]]
                mask = oks[args[0]]
                if op == "add":
                    v = a + vals[args[1]]
                elif op == "sub":
                    v = a - vals[args[1]]
                elif op == "mul":
                    v = a * vals[args[1]]
                elif op == "div":
                    v = np.divide(a, vals[args[1]])
                elif op == "pow":
                    num, den = ins.payload
                    v = np.power(a, np.float64(num / den) if den != 1 else np.float64(num))
                elif op == "neg":
                    v = -a
                elif op == "sin":
                    v = np.sin(a)
                elif op == "cos":
                    v = np.cos(a)
                elif op == "exp":
                    v = np.exp(a)
                elif op == "ln":
                    v = np.log(a)
                elif op == "abs":
                    v = np.abs(a)
                elif op == "floor":
                    v = np.floor(a)
                elif op == "sign":
                    v = np.sign(a)
                elif op == "select":
                    v = np.where(a < vals[args[1]], vals[args[2]], vals[args[3]])
                else:  # pragma: no cover - compile_tree emits only the ops above
                    raise ValueError(f"unknown op {op}")
                for s in args[1:]:
                    mask = _and(mask, oks[s])
                if ins.cond >= 0:
                    operand = prog.cond_operand[ins.cond]
                    u = vals[operand]
                    sat = _check(conds[ins.cond].kind, u)
                    if record:
                        observed[ins.cond] = (u, sat, oks[operand])
                    mask = _and(mask, sat)
            vals[ins.out] = v
            oks[ins.out] = mask
            for r in ins.release:
                vals[r] = None
                oks[r] = None
    m = X.shape[0]
    values = np.broadcast_to(np.asarray(vals[prog.result], dtype=np.float64), (m,))
    ok = oks[prog.result]
    if ok is not None:
        ok = np.broadcast_to(np.asarray(ok, dtype=bool), (m,))
    return values, ok, observed


def _as_row(tree: Tree, x) -> np.ndarray:
    if isinstance(x, (str, bytes)):
        raise TypeError("x must be a sequence of coordinates")
    coords = [_to_float(c) for c in x]
    if len(coords) != tree.dim:
        raise DimensionError(f"expected {tree.dim} coordinates, got {len(coords)}")
    return np.array(coords, dtype=np.float64).reshape(1, tree.dim)


def _to_float(c) -> float:
    if isinstance(c, (str, Decimal)):
        return float(str(c).strip())
    return float(c)


def eval_machine(tree: Tree, x: Sequence) -> Feasible | Infeasible:
    """Evaluate ``tree`` at ``x`` in binary64.

    Coordinates may be floats or decimal strings; strings are rounded to the
    nearest double. Every domain condition is checked, so an infeasible result
    lists all violated base terms, not just the first.
    """
    row = _as_row(tree, x)
    values, ok, observed = _run(tree.program, row, record=True)
    violations = []
    for cond, obs in zip(tree.program.conditions, observed):
        u, sat, operand_ok = obs
        if operand_ok is not None and not bool(np.asarray(operand_ok).reshape(-1)[0]):
            violations.append(Violation(cond, None))
        elif not bool(np.asarray(sat).reshape(-1)[0]):
            violations.append(Violation(cond, float(np.asarray(u).reshape(-1)[0])))
    if violations:
        return Infeasible(tuple(violations))
    value = float(values[0])
    if not math.isfinite(value):
        return Infeasible((Violation(OVERFLOW, value),))
    return Feasible(value)


def base_values(tree: Tree, x: Sequence) -> list[BaseValue]:
    """Operand value and verdict for every domain condition at ``x``."""
    row = _as_row(tree, x)
    _, _, observed = _run(tree.program, row, record=True)
    out = []
    for cond, (u, sat, operand_ok) in zip(tree.program.conditions, observed):
        if operand_ok is not None and not bool(np.asarray(operand_ok).reshape(-1)[0]):
            out.append(BaseValue(cond, None, None))
        else:
            out.append(
                BaseValue(
                    cond,
                    float(np.asarray(u).reshape(-1)[0]),
                    bool(np.asarray(sat).reshape(-1)[0]),
                )
            )
    return out


def evaluate_batch(tree: Tree, X) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised evaluation of the rows of ``X``.

    Returns ``(values, feasible)``; ``values`` is NaN wherever ``feasible`` is
    False. Non-finite results count as infeasible, as in :func:`eval_machine`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.dim:
        raise DimensionError(f"expected an (m, {tree.dim}) array, got shape {X.shape}")
    values, ok, _ = _run(tree.program, X)
    feasible = np.isfinite(values)
    if ok is not None:
        feasible &= ok
    return np.where(feasible, values, np.nan), feasible


def feasible_mask(tree: Tree, X) -> np.ndarray:
    return evaluate_batch(tree, X)[1]
