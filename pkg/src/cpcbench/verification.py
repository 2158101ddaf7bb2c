"""Re-evaluation of reported solutions and Type I-IV classification.

Coordinates travel as decimal strings so that a reported point is judged
exactly as printed. Types:

* I   feasible and consistent with a best-known global optimum
* II  feasible but elsewhere (a local optimum or a poorer point)
* III no feasible solution was returned
* IV  the reported value disagrees with the re-evaluated one, or the point
      is not in the domain at all
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Sequence

from .expr.extended import DEFAULT_DIGITS, base_values_extended, eval_extended
from .expr.machine import base_values, eval_machine
from .expr.outcome import BaseValue, DimensionError, Feasible, Infeasible
from .suite import FunctionSpec

NO_SOLUTION = "no solution"
TYPE_ORDER = ("I", "II", "III", "IV")


class NoCoordinates(ValueError):
    pass


class UnclassifiableWithoutReference(LookupError):
    pass


@dataclass(frozen=True)
class SolutionRecord:
    function_id: str
    algorithm: str
    x: tuple[str, ...] | None  # None marks "no solution"
    reported_value: str | None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.x is not None:
            object.__setattr__(self, "x", tuple(_decimal_text(c) for c in self.x))
        if self.reported_value is not None:
            object.__setattr__(self, "reported_value", _decimal_text(self.reported_value))

    @property
    def has_solution(self) -> bool:
        return self.x is not None

    def to_dict(self) -> dict:
        out = {
            "function": self.function_id,
            "algorithm": self.algorithm,
            "x": list(self.x) if self.x is not None else None,
            "reported": self.reported_value if self.x is not None else NO_SOLUTION,
        }
        out.update(self.meta)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionRecord":
        try:
            fid, alg = d["function"], d["algorithm"]
        except KeyError as exc:
            raise ValueError(f"record lacks field {exc.args[0]!r}") from None
        x = d.get("x")
        rep = d.get("reported")
        if x is None or rep == NO_SOLUTION:
            x, rep = None, None
        meta = {k: v for k, v in d.items() if k not in ("function", "algorithm", "x", "reported")}
        return cls(fid, alg, x, rep, meta)

    @classmethod
    def from_json(cls, line: str) -> "SolutionRecord":
        return cls.from_dict(json.loads(line))


def _decimal_text(c) -> str:
    if isinstance(c, float):
        return repr(c)
    s = str(c).strip()
    try:
        d = Decimal(s)
    except Exception:
        raise ValueError(f"not a decimal number: {c!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite number: {c!r}")
    return s


def record_from_run(function_id: str, algorithm: str, result, **meta) -> SolutionRecord:
    """Record for a :class:`~cpcbench.solvers.RunResult` (coordinates as repr strings)."""
    if result.best_x is None:
        return SolutionRecord(function_id, algorithm, None, None, meta)
    return SolutionRecord(
        function_id,
        algorithm,
        tuple(repr(float(c)) for c in result.best_x),
        repr(float(result.reported_value)),
        meta,
    )


@dataclass(frozen=True)
class ClassifyConfig:
    value_rel_tol: float = 1e-3
    point_tol: float = 2e-3  # per coordinate, as a fraction of the range
    report_match_tol: float = 1e-6
    digits: int = DEFAULT_DIGITS
    coords: str = "exact"  # "binary64" rounds coordinates to doubles first

    def __post_init__(self):
        if min(self.value_rel_tol, self.point_tol, self.report_match_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.digits < 1:
            raise ValueError("digits must be positive")


@dataclass(frozen=True)
class Classification:
    types: frozenset
    reevaluated: object  # mpf, or None when infeasible / no solution
    outcome: Feasible | Infeasible | None
    diagnostics: tuple[BaseValue, ...] = ()
    matched_optimum_index: int | None = None
    report_error: float | None = None

    @property
    def label(self) -> str:
        return "+".join(t for t in TYPE_ORDER if t in self.types)


def _tree(spec: FunctionSpec, n: int):
    return spec.build(n if spec.dimension.scalable else None)


def reevaluate(record: SolutionRecord, spec: FunctionSpec, digits: int = DEFAULT_DIGITS,
               coords: str = "exact"):
    """Extended-precision outcome of the record's point and its base-term values."""
    if record.x is None:
        raise NoCoordinates(f"{record.algorithm} on {record.function_id}: no coordinates")
    n = len(record.x)
    if not spec.dimension.scalable and n != spec.dimension.n:
        raise DimensionError(f"{spec.id} needs {spec.dimension.n} coordinates, got {n}")
    tree = _tree(spec, n)
    outcome = eval_extended(tree, record.x, digits=digits, coords=coords)
    return outcome, tuple(base_values_extended(tree, record.x, digits=digits, coords=coords))


def _near(x, ref, spec: FunctionSpec, tol: float) -> bool:
    width = spec.range_width * tol + spec.plateau
    return all(abs(Decimal(a) - Decimal(b)) <= Decimal(repr(width)) for a, b in zip(x, ref))


def classify(record: SolutionRecord, spec: FunctionSpec, cfg: ClassifyConfig | None = None) -> Classification:
    cfg = cfg or ClassifyConfig()
    if record.x is None:
        return Classification(frozenset({"III"}), None, None)
    outcome, diag = reevaluate(record, spec, cfg.digits, cfg.coords)
    if not outcome.feasible:
        return Classification(frozenset({"IV"}), None, outcome, diag)

    value = outcome.value
    report_error = None
    mismatch = False
    if record.reported_value is not None:
        rep = Decimal(record.reported_value)
        val = Decimal(str(value))
        report_error = float(abs(rep - val) / max(Decimal(1), abs(val)))
        mismatch = report_error > cfg.report_match_tol

    refs = spec.references(len(record.x) if spec.dimension.scalable else None)
    if not refs:
        raise UnclassifiableWithoutReference(f"{spec.id} has no best-known solution")

    if mismatch:
        # a misreported value cannot certify a global optimum
        return Classification(frozenset({"II", "IV"}), value, outcome, diag, None, report_error)

    val = Decimal(str(value))
    for i, ref in enumerate(refs):
        fstar = Decimal(ref.f)
        if abs(val - fstar) / max(Decimal(1), abs(fstar)) > Decimal(repr(cfg.value_rel_tol)):
            continue
        for image in spec.symmetry_images(ref.x):
            if _near(record.x, image, spec, cfg.point_tol):
                return Classification(frozenset({"I"}), value, outcome, diag, i, report_error)
    return Classification(frozenset({"II"}), value, outcome, diag, None, report_error)


def classify_many(records: Sequence[SolutionRecord], registry, cfg: ClassifyConfig | None = None):
    return [classify(r, registry.get(r.function_id), cfg) for r in records]


@dataclass(frozen=True)
class ProbeRow:
    label: str
    coordinate: int | None  # 0-based index of the perturbed coordinate
    delta: str | None
    x: tuple[str, ...]
    machine: Feasible | Infeasible
    extended: Feasible | Infeasible


def _last_digit_unit(s: str) -> Decimal:
    exp = Decimal(s).as_tuple().exponent
    return Decimal((0, (1,), exp))


def perturb(s: str, delta: Decimal) -> str:
    with localcontext() as ctx:
        ctx.prec = 100
        return str(Decimal(s) + delta)


def sensitivity_probe(
    spec: FunctionSpec,
    x: Sequence,
    mode: str | float = "last_digit",
    digits: int = DEFAULT_DIGITS,
    coords: str = "exact",
) -> list[ProbeRow]:
    """Evaluate ``x`` and its one-coordinate perturbations on both backends.

    ``mode="last_digit"`` moves each coordinate's final printed digit by -1
    and +1 (a string-level change, so "10.671363853407628" becomes "...627"
    and "...629"); a number gives a fixed step of that size instead.
    """
    xs = tuple(_decimal_text(c) for c in x)
    if not xs:
        raise ValueError("empty point")
    tree = _tree(spec, len(xs))

    def row(label, k, delta, point):
        return ProbeRow(
            label, k, delta, point,
            eval_machine(tree, point),
            eval_extended(tree, point, digits=digits, coords=coords),
        )

    rows = [row("base", None, None, xs)]
    for k, c in enumerate(xs):
        if mode == "last_digit":
            unit = _last_digit_unit(c)
        else:
            unit = Decimal(repr(float(mode))) if not isinstance(mode, str) else Decimal(mode)
            if unit <= 0:
                raise ValueError("step must be positive")
        for sign, tag in ((-1, "-"), (1, "+")):
            d = unit * sign
            point = xs[:k] + (perturb(c, d),) + xs[k + 1:]
            rows.append(row(f"x{k + 1}{tag}", k, str(d), point))
    return rows


def feasibility_report(spec: FunctionSpec, x: Sequence, backend: str = "machine",
                       digits: int = DEFAULT_DIGITS) -> list[BaseValue]:
    """Operand value and verdict of every domain condition at ``x``."""
    xs = tuple(_decimal_text(c) for c in x)
    tree = _tree(spec, len(xs))
    if backend == "machine":
        return base_values(tree, xs)
    if backend == "extended":
        return base_values_extended(tree, xs, digits=digits)
    raise ValueError(f"unknown backend {backend!r}")


def format_report(rows: Sequence[BaseValue]) -> str:
    lines = ["term,relation,binding,value,satisfied"]
    for b in rows:
        binding = ";".join(f"{k}={v}" for k, v in (b.condition.binding or ()))
        value = "indeterminate" if b.value is None else _fmt(b.value)
        sat = "" if b.satisfied is None else str(bool(b.satisfied)).lower()
        lines.append(f"{b.label},{b.condition.kind.relation},{binding},{value},{sat}")
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    try:
        import mpmath

        return mpmath.nstr(v, 20)
    except TypeError:
        return str(v)
