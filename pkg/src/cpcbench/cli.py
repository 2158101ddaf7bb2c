"""Command-line front end.

    cpcbench list [--all]
    cpcbench fr CPC-DF8 CPC-DF3 --samples 5000000 --runs 5 --seed 0
    cpcbench run CPC-DF8 --algorithms GA,SA --runs 20 --seed 2024 --out records.jsonl
    cpcbench classify records.jsonl --out report/
    cpcbench probe CPC-DF8 2.004219271403496 10.671363853407628
    cpcbench grid CPC-DF8 --resolution 100 --out grid.csv

Tables are CSV, solution records are JSON lines. Errors print one JSON
object on stderr; usage errors exit with status 2, other failures with 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import Counter as Tally
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import feasibility, suite
from .expr.extended import DEFAULT_DIGITS
from .solvers import ALGORITHMS, PENALTY, SolverConfig, run_protocol
from .verification import (
    TYPE_ORDER,
    ClassifyConfig,
    SolutionRecord,
    UnclassifiableWithoutReference,
    classify,
    feasibility_report,
    format_report,
    record_from_run,
    sensitivity_probe,
)


class UsageError(Exception):
    pass


@dataclass
class ExperimentManifest:
    functions: list[str]
    algorithms: list[str] = field(default_factory=lambda: ["GA", "SA", "MSQN", "GPSO"])
    runs: int = 20
    master_seed: int = 0
    penalty_value: float = PENALTY
    n: int | None = None
    feasible_seed_init: bool = False
    presample_budget: int = 100_000
    solver: dict = field(default_factory=dict)  # SolverConfig overrides
    workers: int = 1
    digits: int = DEFAULT_DIGITS

    def validate(self, registry: suite.Registry) -> None:
        if self.runs < 1:
            raise UsageError("runs must be >= 1")
        for fid in self.functions:
            spec = registry.get(fid)
            if not spec.has_definition:
                raise suite.MissingDefinition(f"{fid}: formula not loaded (use --external)")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise UsageError(f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}")


def _registry(args) -> suite.Registry:
    reg = suite.Registry()
    for path in args.external or ():
        reg.load_external(path)
    return reg


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None, name: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if name is not None:
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _parse_bounds(text: str | None):
    """``lo:hi`` for all coordinates, or ``lo1:hi1,lo2:hi2,...``."""
    if text is None:
        return None
    parts = [p.split(":") for p in text.split(",")]
    if any(len(p) != 2 for p in parts):
        raise UsageError(f"bad --bounds {text!r}; expected lo:hi[,lo:hi...]")
    lo = [float(p[0]) for p in parts]
    hi = [float(p[1]) for p in parts]
    if len(parts) == 1:
        return lo[0], hi[0]
    return np.array(lo), np.array(hi)


# ---------------------------------------------------------------------------


def cmd_list(args) -> int:
    reg = _registry(args)
    specs = reg.all() if args.all else reg.defined()
    rows = [
        (
            s.id,
            str(s.dimension),
            s.range_label or f"[{s.bounds[0]:g},{s.bounds[1]:g}]",
            "Y" if s.separable else "N",
            "" if s.fr is None else str(s.fr),
            str(s.multiplicity),
            "yes" if s.has_definition else "no",
        )
        for s in specs
    ]
    _emit(_csv(rows, ["id", "dim", "range", "sep", "fr_percent", "optima", "defined"]), args.out)
    return 0


def cmd_fr(args) -> int:
    reg = _registry(args)
    bounds = _parse_bounds(args.bounds)
    rows, js = [], []
    for fid in args.ids:
        spec = reg.get(fid)
        est = feasibility.estimate_fr(
            spec, args.samples, args.runs, seed=args.seed, n=args.n, bounds=bounds,
            workers=args.workers,
        )
        ref = spec.fr
        rows.append((
            fid, args.samples, args.runs, repr(est.mean_percent), repr(est.binomial_stderr_percent),
            "" if ref is None or bounds is not None else str(ref),
            ";".join(repr(p) for p in est.per_run),
        ))
        js.append({"function": fid, "seed": args.seed, **asdict(est)})
    text = _csv(rows, ["id", "samples_per_run", "runs", "mean_percent", "stderr_percent",
                       "reference_percent", "per_run_percent"])
    if args.out:
        _emit(text, args.out, "fr.csv")
        _emit(json.dumps(js, indent=1) + "\n", args.out, "fr.json")
    else:
        _emit(text, None)
    return 0


def _manifest_from_args(args) -> ExperimentManifest:
    base = {}
    if args.manifest:
        base = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        unknown = set(base) - set(ExperimentManifest.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown manifest keys: {sorted(unknown)}")
    if args.ids:
        base["functions"] = args.ids
    if "functions" not in base:
        raise UsageError("no functions given")
    if args.algorithms:
        base["algorithms"] = args.algorithms.split(",")
    for key, attr in (("runs", "runs"), ("master_seed", "seed"), ("n", "n"),
                      ("workers", "workers"), ("digits", "digits")):
        v = getattr(args, attr)
        if v is not None:
            base[key] = v
    if args.feasible_seed_init:
        base["feasible_seed_init"] = True
    solver = dict(base.get("solver", {}))
    for key in ("population", "generations", "iterations", "starts", "max_evals"):
        v = getattr(args, key)
        if v is not None:
            solver[key] = v
    base["solver"] = solver
    return ExperimentManifest(**base)


def run_manifest(m: ExperimentManifest, registry: suite.Registry) -> list[SolutionRecord]:
    m.validate(registry)
    records = []
    for fid in m.functions:
        spec = registry.get(fid)
        for alg in m.algorithms:
            cfg = SolverConfig(algorithm=alg, **m.solver)
            proto = run_protocol(
                spec, alg, runs=m.runs, master_seed=m.master_seed, config=cfg, n=m.n,
                penalty_value=m.penalty_value, feasible_seed_init=m.feasible_seed_init,
                presample_budget=m.presample_budget, workers=m.workers, digits=m.digits,
            )
            for i, res in enumerate(proto.results):
                records.append(record_from_run(
                    fid, alg, res, run=i, seed=res.seed, evaluations=res.evaluations_used, best=False,
                ))
            b = proto.best_index
            records.append(record_from_run(
                fid, alg, proto.best, run=b, seed=proto.best.seed,
                evaluations=proto.best.evaluations_used, best=True,
            ))
    return records


def cmd_run(args) -> int:
    reg = _registry(args)
    m = _manifest_from_args(args)
    records = run_manifest(m, reg)
    _emit("".join(r.to_json() + "\n" for r in records), args.out)
    return 0


def _read_records(path: str) -> list[SolutionRecord]:
    out = []
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    for k, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(SolutionRecord.from_json(line))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"{path}:{k}: bad record: {exc}") from None
    return out


def _percent_table(groups: dict, key_name: str):
    rows = []
    for key in sorted(groups, key=str):
        labels = groups[key]
        total = len(labels)
        tally = Tally()
        for types in labels:
            tally.update(types)
        rows.append([key, total] + [f"{100.0 * tally[t] / total:.2f}" for t in TYPE_ORDER]
                    + [f"{100.0 * tally['unclassified'] / total:.2f}"])
    return _csv(rows, [key_name, "records"] + [f"type_{t}" for t in TYPE_ORDER] + ["unclassified"])


def cmd_classify(args) -> int:
    reg = _registry(args)
    cfg = ClassifyConfig(
        value_rel_tol=args.value_tol, point_tol=args.point_tol,
        report_match_tol=args.report_tol, digits=args.digits,
    )
    records = _read_records(args.records)
    if args.best_only:
        records = [r for r in records if r.meta.get("best", True)]
    per_record, by_alg, by_fun, by_fr = [], defaultdict(list), defaultdict(list), defaultdict(list)
    for r in records:
        spec = reg.get(r.function_id)
        try:
            c = classify(r, spec, cfg)
            types = sorted(c.types, key=TYPE_ORDER.index)
            label = c.label
            value = "infeasible" if c.reevaluated is None and r.x is not None else (
                "" if c.reevaluated is None else str(c.reevaluated)[:20])
        except UnclassifiableWithoutReference:
            types, label, value = ["unclassified"], "unclassified", ""
        per_record.append((r.function_id, r.algorithm, r.meta.get("run", ""),
                           ";".join(r.x) if r.x else "no solution",
                           r.reported_value or "", value, label))
        by_alg[r.algorithm].append(types)
        by_fun[r.function_id].append(types)
        if r.function_id.startswith("CPC-") and spec.fr is not None:
            by_fr["FR>1%" if spec.fr.percent > 1 else "FR<1%"].append(types)
    sections = {
        "classification.csv": _csv(per_record, ["function", "algorithm", "run", "x", "reported",
                                                "reevaluated", "types"]),
        "by_algorithm.csv": _percent_table(by_alg, "algorithm"),
        "by_function.csv": _percent_table(by_fun, "function"),
        "by_fr_group.csv": _percent_table(by_fr, "fr_group"),
    }
    if args.out:
        for name, text in sections.items():
            _emit(text, args.out, name)
    else:
        sys.stdout.write("\n".join(f"# {name}\n{text}" for name, text in sections.items()))
    return 0


def _outcome_cells(o):
    if o.feasible:
        v = o.value
        return ["feasible", repr(v) if isinstance(v, float) else str(v)[:22], ""]
    return ["infeasible", "", ";".join(o.labels)]


def cmd_probe(args) -> int:
    reg = _registry(args)
    if not args.x:
        raise UsageError("probe needs at least one coordinate")
    spec = reg.get(args.id)
    mode = "last_digit" if args.step is None else args.step
    rows = []
    for r in sensitivity_probe(spec, args.x, mode=mode, digits=args.digits):
        rows.append([r.label, *r.x, *_outcome_cells(r.machine), *_outcome_cells(r.extended)])
    header = ["label"] + [f"x{k + 1}" for k in range(len(args.x))] + [
        "machine", "machine_value", "machine_violated",
        "extended", "extended_value", "extended_violated",
    ]
    text = _csv(rows, header)
    if args.report:
        text += "\n" + format_report(feasibility_report(spec, args.x)) + "\n"
    _emit(text, args.out)
    return 0


def cmd_grid(args) -> int:
    reg = _registry(args)
    spec = reg.get(args.id)
    P, values, ok = feasibility.grid_evaluate(spec, args.resolution, _parse_bounds(args.bounds))
    rows = [(repr(float(p[0])), repr(float(p[1])), repr(float(v)) if k else "infeasible")
            for p, v, k in zip(P, values, ok)]
    _emit(_csv(rows, ["x1", "x2", "value"]), args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpcbench", description="CPC benchmark harness")
    p.add_argument("--external", action="append", metavar="REGISTRY",
                   help="registry file with further function definitions (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("list", help="catalog of registered functions")
    s.add_argument("--all", action="store_true", help="include functions without a loaded formula")
    s.add_argument("--out")
    s.set_defaults(func=cmd_list)

    s = sub.add_parser("fr", help="Monte Carlo feasible ratio")
    s.add_argument("ids", nargs="+")
    s.add_argument("--samples", type=int, default=5_000_000, help="samples per run")
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n", type=int, help="dimension for scalable functions")
    s.add_argument("--bounds", help="sub-box lo:hi or lo1:hi1,lo2:hi2,...")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="directory for fr.csv and fr.json")
    s.set_defaults(func=cmd_fr)

    s = sub.add_parser("run", help="run solvers under the 20-run protocol")
    s.add_argument("ids", nargs="*")
    s.add_argument("--manifest", help="JSON experiment manifest")
    s.add_argument("--algorithms", help=f"comma list from {','.join(ALGORITHMS)}")
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int, help="master seed")
    s.add_argument("--n", type=int)
    s.add_argument("--population", type=int)
    s.add_argument("--generations", type=int)
    s.add_argument("--iterations", type=int)
    s.add_argument("--starts", type=int)
    s.add_argument("--max-evals", dest="max_evals", type=int)
    s.add_argument("--feasible-seed-init", action="store_true",
                   help="seed initial populations with pre-sampled feasible points")
    s.add_argument("--workers", type=int)
    s.add_argument("--digits", type=int)
    s.add_argument("--out", help="records file (JSON lines)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("classify", help="Type I-IV classification of a records file")
    s.add_argument("records", help="JSON-lines records file, or - for stdin")
    s.add_argument("--best-only", action="store_true", help="only records marked best")
    s.add_argument("--value-tol", type=float, default=ClassifyConfig.value_rel_tol)
    s.add_argument("--point-tol", type=float, default=ClassifyConfig.point_tol)
    s.add_argument("--report-tol", type=float, default=ClassifyConfig.report_match_tol)
    s.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    s.add_argument("--out", help="directory for the CSV tables")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("probe", help="last-digit sensitivity probe")
    s.add_argument("id")
    s.add_argument("x", nargs="*", help="coordinates as decimal strings")
    s.add_argument("--step", type=float, help="fixed step instead of last-digit perturbation")
    s.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    s.add_argument("--report", action="store_true", help="append the base-term table")
    s.add_argument("--out")
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("grid", help="evaluate a 2-D function on a grid")
    s.add_argument("id")
    s.add_argument("--resolution", type=int, default=100)
    s.add_argument("--bounds")
    s.add_argument("--out")
    s.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _error("UsageError", str(exc))
        return 2
    except (ValueError, LookupError, OSError) as exc:
        _error(type(exc).__name__, str(exc))
        return 1


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
