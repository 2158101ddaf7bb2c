"""Benchmark function registry.

The registry always contains

* metadata for all 25 CPC functions (dimension, search range, separability,
  reference feasible ratio, number of global optima),
* expression trees for the four CPC functions whose formulas are published
  (CPC-DF3, CPC-DF8, CPC-DF12, CPC-DF13),
* the classical comparators F37 (Corana), F138 (Step 2) and F170
  (Xin-She Yang 3), which have no domain restrictions.

Formulas for the remaining CPC functions are loaded from a registry file of
s-expression records (see :func:`parse_registry`)::

    (function :id "CPC-DF15" :dim 2 :bounds (-5 5) :sep false :fr 0.000228
              :optima (single)
              :best (("3.17233243403426" "4.15125018443042") "9.998005563035544")
              :expr (...))
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .expr import nodes as N
from .expr.nodes import PI, Tree, cos, exp, fabs, floor, ln, power, sign, sin, sqrt, var
from .expr.sexpr import Atom, ParseError, SList, read_all, to_node
from .expr.sexpr import parse_number


class RegistryError(ValueError):
    pass


class UnknownFunction(KeyError):
    def __str__(self):
        return f"unknown function {self.args[0]!r}"


class MissingDefinition(LookupError):
    """The function is known by its metadata but its formula is not loaded."""


@dataclass(frozen=True)
class Dimension:
    n: int
    scalable: bool = False

    def __str__(self):
        return f"n={self.n}" if self.scalable else str(self.n)


@dataclass(frozen=True)
class Multiplicity:
    kind: str  # "single" | "symmetric" | "asymmetric"
    count: int
    exponent: int | None = None  # symmetric: count == 2 ** exponent

    @classmethod
    def single(cls):
        return cls("single", 1)

    @classmethod
    def symmetric(cls, exponent: int):
        return cls("symmetric", 2**exponent, exponent)

    @classmethod
    def asymmetric(cls, count: int):
        return cls("asymmetric", count)

    def __str__(self):
        if self.kind == "symmetric":
            return f"2^{self.exponent}={self.count}"
        return str(self.count)


@dataclass(frozen=True)
class FeasibleRatio:
    percent: float
    upper_bound: bool = False  # value printed as "<= percent"

    def __str__(self):
        return f"<= {self.percent!r}" if self.upper_bound else repr(self.percent)


@dataclass(frozen=True)
class BestKnown:
    x: tuple[str, ...]
    f: str


@dataclass(frozen=True)
class FunctionSpec:
    id: str
    dimension: Dimension
    bounds: tuple[float, float]
    separable: bool
    fr: FeasibleRatio | None
    multiplicity: Multiplicity
    best_known: tuple[BestKnown, ...] = ()
    builder: Callable[[int], N.Node] | None = field(default=None, compare=False)
    range_label: str = ""
    # half-width of a flat optimal set around each best-known point (plateaus)
    plateau: float = 0.0
    # optimum for other dimensions of a scalable function, if known in closed form
    reference_fn: Callable[[int], tuple[BestKnown, ...]] | None = field(default=None, compare=False)
    source: str = "metadata"

    @property
    def has_definition(self) -> bool:
        return self.builder is not None

    @property
    def n_default(self) -> int:
        return self.dimension.n

    @property
    def range_width(self) -> float:
        return self.bounds[1] - self.bounds[0]

    def resolve_n(self, n: int | None) -> int:
        if self.dimension.scalable:
            if n is None:
                return self.dimension.n
            if n < 2:
                raise ValueError(f"{self.id}: scalable dimension must be >= 2, got {n}")
            return int(n)
        if n is not None and n != self.dimension.n:
            raise ValueError(f"{self.id} has fixed dimension {self.dimension.n}")
        return self.dimension.n

    def build(self, n: int | None = None) -> Tree:
        if self.builder is None:
            raise MissingDefinition(
                f"{self.id}: formula not loaded; supply it with load_external()"
            )
        dim = self.resolve_n(n)
        return Tree(self.builder(dim), dim)

    def box(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        dim = self.resolve_n(n)
        return np.full(dim, float(self.bounds[0])), np.full(dim, float(self.bounds[1]))

    def references(self, n: int | None = None) -> tuple[BestKnown, ...]:
        dim = self.resolve_n(n)
        if dim == self.dimension.n and self.best_known:
            return self.best_known
        if self.reference_fn is not None:
            return self.reference_fn(dim)
        return ()

    def symmetry_images(self, x: Iterable) -> list[tuple]:
        """All sign-flip images of ``x`` when optima are symmetric, else ``[x]``."""
        x = tuple(x)
        if self.multiplicity.kind != "symmetric":
            return [x]
        images = []
        for flips in itertools.product((False, True), repeat=len(x)):
            images.append(tuple(_negate(c) if f else c for c, f in zip(x, flips)))
        return list(dict.fromkeys(images))


def _negate(c):
    if isinstance(c, str):
        s = c.strip()
        return s[1:] if s.startswith("-") else "-" + s.lstrip("+")
    return -c


# Fun ID, dim, scalable, range label, lo, hi, separable, FR %, FR is upper bound, optima
_CATALOG_ROWS = [
    ("CPC-DF1", 2, False, "[-100,100]", -100, 100, False, 48.603052, False, "1"),
    ("CPC-DF2", 5, True, "[-5,5]", -5, 5, True, 0.011532, False, "2^5"),
    ("CPC-DF3", 2, False, "[-100,100]", -100, 100, False, 0.05724, False, "1"),
    ("CPC-DF4", 5, True, "[-512,512]", -512, 512, False, 0.000484, False, "1"),
    ("CPC-DF5", 5, True, "[-6,6]", -6, 6, True, 0.000036, False, "2^5"),
    ("CPC-DF6", 4, True, "[-100,100]", -100, 100, False, 0.000544, False, "1"),
    ("CPC-DF7", 3, True, "[-10,10]", -10, 10, True, 0.007084, False, "1"),
    ("CPC-DF8", 2, False, "[0,14]", 0, 14, False, 15.886572, False, "1"),
    ("CPC-DF9", 2, False, "[-10,10]", -10, 10, False, 37.250012, False, "1"),
    ("CPC-DF10", 2, False, "[-10,10]", -10, 10, False, 35.671264, False, "2"),
    ("CPC-DF11", 2, False, "[-6,6]", -6, 6, False, 0.00114, False, "2^2"),
    ("CPC-DF12", 5, True, "[-100,100]", -100, 100, False, 0.010204, False, "2^4"),
    ("CPC-DF13", 2, False, "[-100,100]", -100, 100, False, 0.000116, False, "1"),
    ("CPC-DF14", 2, False, "[-10,10]", -10, 10, False, 29.208808, False, "1"),
    ("CPC-DF15", 2, False, "[-5,5]", -5, 5, False, 0.000228, False, "1"),
    ("CPC-DF16", 5, True, "[-512,512]", -512, 512, False, 0.00002, False, "2"),
    ("CPC-DF17", 2, False, "[-100,100]", -100, 100, False, 0.554864, False, "1"),
    ("CPC-DF18", 4, False, "[-5000,5000]", -5000, 5000, False, 0.000001, True, "1"),
    ("CPC-DF19", 6, False, "[-100,100]", -100, 100, False, 0.014292, False, "1"),
    ("CPC-DF20", 5, True, "[-10,10]", -10, 10, False, 0.023148, False, "1"),
    ("CPC-DF21", 5, True, "[-30,30]", -30, 30, False, 0.036648, False, "1"),
    ("CPC-DF22", 2, False, "[-100,100]", -100, 100, False, 0.06192, False, "1"),
    ("CPC-DF23", 5, True, "[-100,100]", -100, 100, False, 0.76602, False, "1"),
    ("CPC-DF24", 2, False, "[-2pi,2pi]", -2 * math.pi, 2 * math.pi, False, 2.429232, False, "2"),
    ("CPC-DF25", 3, True, "[-10,10]", -10, 10, False, 6.763992, False, "1"),
]


def _multiplicity(text: str) -> Multiplicity:
    if text.startswith("2^"):
        return Multiplicity.symmetric(int(text[2:]))
    k = int(text)
    return Multiplicity.single() if k == 1 else Multiplicity.asymmetric(k)


CATALOG: dict[str, FunctionSpec] = {
    fid: FunctionSpec(
        id=fid,
        dimension=Dimension(n, scalable),
        bounds=(float(lo), float(hi)),
        separable=sep,
        fr=FeasibleRatio(fr, ub),
        multiplicity=_multiplicity(opt),
        range_label=label,
    )
    for fid, n, scalable, label, lo, hi, sep, fr, ub, opt in _CATALOG_ROWS
}


# ---------------------------------------------------------------------------
# Published CPC formulas


def _cpc_df3(n: int) -> N.Node:
    x1, x2 = var(0), var(1)
    inner = cos(N.Const(-2) / 3 * x1**3 - 8 * x1**2) if False else cos(
        N.const("-2/3") * x1**3 - 8 * x1**2
    )
    return -ln(x1 - x2 * ln(inner)) - ln(
        33 * x1 - x1 * x2 + 5 - ((x1 - 4) ** 2 + (x2 - 5) ** 2 - 4) ** 2
    )


def _cpc_df8(n: int) -> N.Node:
    x1, x2 = var(0), var(1)
    ratio = sin(PI * (x1 - 2)) * sin(PI * (x2 - 2)) / (PI**2 * x1 * (x1 - 2) * (x2 - 2))
    return 1 - power(ratio, (103, 100)) + power(2 + (x1 - 7) ** 2 - 2 * (x2 - 7) ** 2, (13, 20))


def _cpc_df12(n: int) -> N.Node:
    xi, xj = N.IndexedVar("i"), N.IndexedVar("i", 1)
    term = sqrt(sin(sqrt(xj**2 - xi**2) - N.const("0.5")) - N.const("0.5")) / power(
        10 * (xj**2 + xi**2) - N.const("0.85"), (1, 5)
    ) + N.const("0.5")
    return -N.Sum("i", 1, n - 1, term)


def _cpc_df13(n: int) -> N.Node:
    x1, x2 = var(0), var(1)
    return sqrt(x1 - 2 * x2**2 - exp(x2 - x1**2)) - power(
        N.const("0.5") * cos(3 * PI * x1 + 4 * PI * x2 + 5) - N.const("0.495") * x1, (1, 5)
    )


# ---------------------------------------------------------------------------
# Classical comparators (no domain restriction)


_CORANA_D = (1, 1000, 10, 100)


def _corana(n: int) -> N.Node:
    total = None
    for i, d in enumerate(_CORANA_D):
        x = var(i)
        z = N.const("0.2") * floor(fabs(x / N.const("0.2")) + N.const("0.49999")) * sign(x)
        pocket = N.const("0.15") * d * (z - N.const("0.05") * sign(z)) ** 2
        term = N.Select(fabs(x - z), N.const("0.05"), pocket, d * x**2)
        total = term if total is None else total + term
    return total


def _step2(n: int) -> N.Node:
    return N.Sum("i", 1, n, floor(N.IndexedVar("i") + N.const("0.5")) ** 2)


def _xin_she_yang3(n: int) -> N.Node:
    beta_term = N.Sum("i", 1, n, power(N.IndexedVar("i") / 15, 10))
    sq = N.Sum("i", 1, n, N.IndexedVar("i") ** 2)
    prod = None
    for i in range(n):
        c = cos(var(i)) ** 2
        prod = c if prod is None else prod * c
    return exp(-beta_term) - 2 * exp(-sq) * prod


def _origin(f: str) -> Callable[[int], tuple[BestKnown, ...]]:
    def refs(n: int) -> tuple[BestKnown, ...]:
        return (BestKnown(("0",) * n, f),)

    return refs


def _core_specs() -> dict[str, FunctionSpec]:
    specs = {}
    published = {
        "CPC-DF3": (_cpc_df3, ()),
        "CPC-DF8": (
            _cpc_df8,
            (BestKnown(("1.23746138046895", "2.80435634606639"), "0.952180605654428"),),
        ),
        "CPC-DF12": (_cpc_df12, ()),
        "CPC-DF13": (_cpc_df13, ()),
    }
    for fid, (builder, best) in published.items():
        specs[fid] = replace(CATALOG[fid], builder=builder, best_known=best, source="published")
    specs["F37"] = FunctionSpec(
        id="F37",
        dimension=Dimension(4),
        bounds=(-500.0, 500.0),
        separable=True,
        fr=FeasibleRatio(100.0),
        multiplicity=Multiplicity.single(),
        best_known=_origin("0")(4),
        builder=_corana,
        range_label="[-500,500]",
        plateau=0.05,
        source="comparator",
    )
    specs["F138"] = FunctionSpec(
        id="F138",
        dimension=Dimension(2, scalable=True),
        bounds=(-100.0, 100.0),
        separable=True,
        fr=FeasibleRatio(100.0),
        multiplicity=Multiplicity.single(),
        best_known=_origin("0")(2),
        builder=_step2,
        range_label="[-100,100]",
        plateau=0.5,
        reference_fn=_origin("0"),
        source="comparator",
    )
    specs["F170"] = FunctionSpec(
        id="F170",
        dimension=Dimension(2, scalable=True),
        bounds=(-20.0, 20.0),
        separable=False,
        fr=FeasibleRatio(100.0),
        multiplicity=Multiplicity.single(),
        best_known=_origin("-1")(2),
        builder=_xin_she_yang3,
        range_label="[-20,20]",
        reference_fn=_origin("-1"),
        source="comparator",
    )
    return specs


CORE_IDS = ("CPC-DF3", "CPC-DF8", "CPC-DF12", "CPC-DF13", "F37", "F138", "F170")


# ---------------------------------------------------------------------------
# Registry file format


def _keywords(record: SList) -> dict[str, object]:
    items = record.items
    if not items or not isinstance(items[0], Atom) or items[0].text != "function":
        raise ParseError("expected (function :key value ...)", record.line, record.col)
    out: dict[str, list] = {}
    rest = items[1:]
    if len(rest) % 2:
        raise ParseError("keyword without a value", record.line, record.col)
    for key, value in zip(rest[::2], rest[1::2]):
        if not isinstance(key, Atom) or not key.text.startswith(":"):
            where = (key.line, key.col)
            raise ParseError("expected a :keyword", *where)
        out.setdefault(key.text[1:], []).append(value)
    return out


def _one(kw, name, record, required=True):
    vals = kw.get(name)
    if not vals:
        if required:
            raise ParseError(f"missing :{name}", record.line, record.col)
        return None
    if len(vals) > 1:
        raise ParseError(f"duplicate :{name}", vals[1].line, vals[1].col)
    return vals[0]


def _atom_text(d, what) -> str:
    if not isinstance(d, Atom):
        raise ParseError(f"{what} must be an atom", d.line, d.col)
    return d.text


def _number(d) -> float:
    if isinstance(d, Atom):
        q = parse_number(d.text)
        if q is not None:
            return float(q)
    # constant expressions such as (* -2 pi)
    from .expr.machine import eval_machine

    try:
        out = eval_machine(Tree(to_node(d), 0), [])
    except (ParseError, IndexError, NameError) as exc:
        raise ParseError(f"expected a constant: {exc}", d.line, d.col) from None
    if not out.feasible:
        raise ParseError("constant is undefined", d.line, d.col)
    return float(out.value)


def _bool(d) -> bool:
    t = _atom_text(d, ":sep").lower()
    if t in ("true", "yes", "t"):
        return True
    if t in ("false", "no", "nil"):
        return False
    raise ParseError(f"expected true/false, got {t!r}", d.line, d.col)


def _parse_record(record: SList) -> FunctionSpec:
    kw = _keywords(record)
    id_d = _one(kw, "id", record)
    fid = _atom_text(id_d, ":id")

    dim_d = _one(kw, "dim", record)
    if isinstance(dim_d, SList):
        parts = dim_d.items
        if len(parts) != 2 or _atom_text(parts[0], ":dim") not in ("scalable", "n"):
            raise ParseError("expected :dim k or :dim (scalable k)", dim_d.line, dim_d.col)
        dimension = Dimension(int(_number(parts[1])), scalable=True)
    else:
        dimension = Dimension(int(_number(dim_d)))
    if dimension.n < 1:
        raise ParseError("dimension must be positive", dim_d.line, dim_d.col)

    b_d = _one(kw, "bounds", record)
    if not isinstance(b_d, SList) or len(b_d.items) != 2:
        raise ParseError("expected :bounds (lo hi)", b_d.line, b_d.col)
    lo, hi = (_number(v) for v in b_d.items)
    if not lo < hi:
        raise ParseError("bounds need lo < hi", b_d.line, b_d.col)
    label = "[" + ",".join(
        v.text if isinstance(v, Atom) else f"{_number(v):g}" for v in b_d.items
    ) + "]"

    sep_d = _one(kw, "sep", record, required=False)
    separable = _bool(sep_d) if sep_d is not None else False

    fr_d = _one(kw, "fr", record, required=False)
    fr = None
    if fr_d is not None:
        if isinstance(fr_d, SList):
            if len(fr_d.items) != 2 or _atom_text(fr_d.items[0], ":fr") not in ("<=", "upper"):
                raise ParseError("expected :fr x or :fr (<= x)", fr_d.line, fr_d.col)
            fr = FeasibleRatio(_number(fr_d.items[1]), upper_bound=True)
        else:
            fr = FeasibleRatio(_number(fr_d))

    opt_d = _one(kw, "optima", record, required=False)
    multiplicity = Multiplicity.single()
    if opt_d is not None:
        if not isinstance(opt_d, SList) or not opt_d.items:
            raise ParseError("expected :optima (single|symmetric e|asymmetric k)", opt_d.line, opt_d.col)
        kind = _atom_text(opt_d.items[0], ":optima")
        args = [int(_number(a)) for a in opt_d.items[1:]]
        if kind == "single" and not args:
            multiplicity = Multiplicity.single()
        elif kind == "symmetric" and len(args) in (1, 2):
            # (symmetric e) or (symmetric 2 e)
            e = args[-1]
            if len(args) == 2 and args[0] != 2:
                raise ParseError("symmetric multiplicity must be 2^e", opt_d.line, opt_d.col)
            multiplicity = Multiplicity.symmetric(e)
        elif kind == "asymmetric" and len(args) == 1:
            multiplicity = Multiplicity.asymmetric(args[0])
        else:
            raise ParseError(f"bad :optima {kind!r}", opt_d.line, opt_d.col)

    best = []
    for b in kw.get("best", []):
        if not isinstance(b, SList) or len(b.items) != 2 or not isinstance(b.items[0], SList):
            raise ParseError('expected :best (("x1" "x2" ...) "f")', b.line, b.col)
        xs = tuple(_atom_text(v, "coordinate") for v in b.items[0].items)
        for v in b.items[0].items:
            if parse_number(v.text) is None:
                raise ParseError(f"bad coordinate {v.text!r}", v.line, v.col)
        f_atom = b.items[1]
        if parse_number(_atom_text(f_atom, "value")) is None:
            raise ParseError(f"bad value {f_atom.text!r}", f_atom.line, f_atom.col)
        if len(xs) != dimension.n:
            raise ParseError(
                f"best-known point has {len(xs)} coordinates, dimension is {dimension.n}",
                b.line,
                b.col,
            )
        best.append(BestKnown(xs, f_atom.text))

    plateau_d = _one(kw, "plateau", record, required=False)
    plateau = _number(plateau_d) if plateau_d is not None else 0.0

    expr_d = _one(kw, "expr", record)

    def builder(n: int, _d=expr_d):
        return to_node(_d, n)

    # surface bad symbols and out-of-range variables now, with a location
    try:
        Tree(builder(dimension.n), dimension.n)
    except (IndexError, NameError) as exc:
        raise ParseError(str(exc), expr_d.line, expr_d.col) from None

    known = set(kw) - {"id", "dim", "bounds", "sep", "fr", "optima", "best", "plateau", "expr"}
    if known:
        k = sorted(known)[0]
        d = kw[k][0]
        raise ParseError(f"unknown keyword :{k}", d.line, d.col)

    return FunctionSpec(
        id=fid,
        dimension=dimension,
        bounds=(lo, hi),
        separable=separable,
        fr=fr,
        multiplicity=multiplicity,
        best_known=tuple(best),
        builder=builder,
        range_label=label,
        plateau=plateau,
        source="external",
    )


def parse_registry(text: str) -> list[FunctionSpec]:
    """Parse registry-file text into function specs (not yet registered)."""
    specs = []
    seen: dict[str, SList] = {}
    for record in read_all(text):
        if not isinstance(record, SList):
            raise ParseError("expected a (function ...) record", record.line, record.col)
        spec = _parse_record(record)
        if spec.id in seen:
            raise RegistryError(f"duplicate function id {spec.id!r} (line {record.line})")
        seen[spec.id] = record
        specs.append(spec)
    return specs


def _metadata_conflicts(spec: FunctionSpec, ref: FunctionSpec) -> list[str]:
    out = []
    if spec.dimension != ref.dimension:
        out.append(f"dimension {spec.dimension} != {ref.dimension}")
    if not (
        math.isclose(spec.bounds[0], ref.bounds[0], rel_tol=1e-12)
        and math.isclose(spec.bounds[1], ref.bounds[1], rel_tol=1e-12)
    ):
        out.append(f"bounds {spec.bounds} != {ref.bounds}")
    if spec.separable != ref.separable:
        out.append(f"separable {spec.separable} != {ref.separable}")
    if spec.fr is not None and spec.fr != ref.fr:
        out.append(f"fr {spec.fr} != {ref.fr}")
    if spec.multiplicity != ref.multiplicity:
        out.append(f"optima {spec.multiplicity} != {ref.multiplicity}")
    return out


class Registry:
    """Function specs by id. Built once, then treated as read-only."""

    def __init__(self, specs: Iterable[FunctionSpec] | None = None):
        self._specs: dict[str, FunctionSpec] = dict(CATALOG)
        self._specs.update(_core_specs())
        for s in specs or ():
            self._specs[s.id] = s

    def get(self, fid: str) -> FunctionSpec:
        try:
            return self._specs[fid]
        except KeyError:
            raise UnknownFunction(fid) from None

    def __contains__(self, fid: str) -> bool:
        return fid in self._specs

    def build(self, fid: str, n: int | None = None) -> Tree:
        spec = self.get(fid)
        if n is not None and not spec.dimension.scalable:
            raise ValueError(f"{fid} has fixed dimension {spec.dimension.n}; do not pass n")
        return spec.build(n)

    def defined(self) -> list[FunctionSpec]:
        """Specs with a loaded formula, CPC functions first in numeric order."""
        return sorted((s for s in self._specs.values() if s.has_definition), key=_sort_key)

    def all(self) -> list[FunctionSpec]:
        return sorted(self._specs.values(), key=_sort_key)

    def load_text(self, text: str) -> list[FunctionSpec]:
        specs = parse_registry(text)
        for s in specs:
            current = self._specs.get(s.id)
            if current is not None and current.has_definition:
                raise RegistryError(f"duplicate function id {s.id!r}: already defined")
        merged = []
        for s in specs:
            ref = CATALOG.get(s.id)
            if ref is not None:
                conflicts = _metadata_conflicts(s, ref)
                if conflicts:
                    raise RegistryError(f"{s.id}: metadata disagrees with the catalog: " + "; ".join(conflicts))
                if s.fr is None:
                    s = replace(s, fr=ref.fr)
                s = replace(s, range_label=ref.range_label)
            merged.append(s)
        for s in merged:
            self._specs[s.id] = s
        return merged

    def load_external(self, path: str | Path) -> list[FunctionSpec]:
        return self.load_text(Path(path).read_text(encoding="utf-8"))


def _sort_key(spec: FunctionSpec):
    fid = spec.id
    if fid.startswith("CPC-DF"):
        return (0, int(fid[6:]))
    if fid.startswith("F") and fid[1:].isdigit():
        return (1, int(fid[1:]))
    return (2, fid)


_default: Registry | None = None


def default_registry() -> Registry:
    global _default
    if _default is None:
        _default = Registry()
    return _default


def get(fid: str) -> FunctionSpec:
    return default_registry().get(fid)


def build(fid: str, n: int | None = None) -> Tree:
    return default_registry().build(fid, n)


def load_external(path: str | Path, registry: Registry | None = None) -> list[FunctionSpec]:
    """Register the records in ``path`` (into ``registry`` or a new one)."""
    return (registry or Registry()).load_external(path)


def structurally_separable(tree: Tree) -> bool:
    """True when the tree is a sum of terms that each depend on one coordinate."""

    def variables(node, env) -> set[int] | None:
        if isinstance(node, N.Var):
            return {node.index}
        if isinstance(node, N.IndexedVar):
            return {env[node.symbol] + node.offset - 1}
        if isinstance(node, N.Sum):
            out = set()
            for i in range(node.lower, node.upper + 1):
                out |= variables(node.body, {**env, node.symbol: i})
            return out
        out = set()
        for c in node.children():
            out |= variables(c, env)
        return out

    def terms(node, env):
        if isinstance(node, (N.Add, N.Sub)):
            yield from terms(node.left, env)
            yield from terms(node.right, env)
        elif isinstance(node, N.Neg):
            yield from terms(node.child, env)
        elif isinstance(node, N.Sum):
            for i in range(node.lower, node.upper + 1):
                yield from terms(node.body, {**env, node.symbol: i})
        else:
            yield node, env

    return all(len(variables(t, env)) <= 1 for t, env in terms(tree.root, {}))
