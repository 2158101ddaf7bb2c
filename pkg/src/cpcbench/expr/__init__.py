"""Domain-checked expression trees with binary64 and extended-precision backends."""

from .extended import DEFAULT_DIGITS, base_values_extended, eval_extended
from .machine import base_values, eval_machine, evaluate_batch, feasible_mask
from .nodes import (
    PI,
    Abs,
    Add,
    Const,
    Cos,
    Div,
    Exp,
    Floor,
    Index,
    IndexedVar,
    Ln,
    Mul,
    Neg,
    Node,
    Pi,
    Pow,
    Select,
    Sign,
    Sin,
    Sub,
    Sum,
    Tree,
    Var,
    const,
    cos,
    exp,
    fabs,
    floor,
    ln,
    power,
    sign,
    sin,
    sqrt,
    var,
)
from .outcome import BaseValue, DimensionError, EvalOutcome, Feasible, Infeasible, Violation
from .program import OVERFLOW, ConditionKind, DomainCondition
from .sexpr import ParseError, parse_expr, to_sexpr


def collect_conditions(tree: Tree) -> list[DomainCondition]:
    """Domain conditions of ``tree`` in evaluation order.

    Fractional-power, negative-integer-power and logarithm operands are
    labelled ``base_1, base_2, ...``; division denominators ``den_1, ...``.
    """
    return list(tree.program.conditions)


__all__ = [
    "PI", "Abs", "Add", "BaseValue", "ConditionKind", "Const", "Cos", "DEFAULT_DIGITS",
    "DimensionError", "Div", "DomainCondition", "EvalOutcome", "Exp", "Feasible", "Floor",
    "Index", "IndexedVar", "Infeasible", "Ln", "Mul", "Neg", "Node", "OVERFLOW", "ParseError",
    "Pi", "Pow", "Select", "Sign", "Sin", "Sub", "Sum", "Tree", "Var", "Violation",
    "base_values", "base_values_extended", "collect_conditions", "const", "cos",
    "eval_extended", "eval_machine", "evaluate_batch", "exp", "fabs", "feasible_mask",
    "floor", "ln", "parse_expr", "power", "sign", "sin", "sqrt", "to_sexpr", "var",
]
