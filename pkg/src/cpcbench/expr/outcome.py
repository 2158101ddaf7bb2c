"""Evaluation results with attributed domain violations."""

from __future__ import annotations

from dataclasses import dataclass

from .program import DomainCondition


class DimensionError(ValueError):
    """Input vector length does not match the tree's dimension."""


@dataclass(frozen=True)
class Violation:
    condition: DomainCondition
    # None when the operand itself could not be evaluated (nested violation)
    observed: object

    @property
    def indeterminate(self) -> bool:
        return self.observed is None


@dataclass(frozen=True)
class Feasible:
    value: object

    feasible = True
    violations: tuple = ()


@dataclass(frozen=True)
class Infeasible:
    violations: tuple[Violation, ...]

    feasible = False
    value = None

    def __post_init__(self):
        if not self.violations:
            raise ValueError("an infeasible outcome needs at least one violation")

    @property
    def labels(self) -> list[str]:
        return [v.condition.label for v in self.violations]


EvalOutcome = Feasible | Infeasible


@dataclass(frozen=True)
class BaseValue:
    """Observed operand of one domain condition at a point."""

    condition: DomainCondition
    value: object  # None if indeterminate
    satisfied: bool | None  # None if indeterminate

    @property
    def label(self) -> str:
        return self.condition.label
