"""Repeated independent runs with best-of selection by extended re-evaluation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..expr.extended import DEFAULT_DIGITS, eval_extended
from ..suite import FunctionSpec
from .base import PENALTY, PenalizedObjective, RunResult, SolverConfig
from .ga import run_ga
from .gpso import run_gpso
from .msqn import run_msqn
from .random_search import run_random_search
from .sa import run_sa

RUNNERS = {
    "GA": run_ga,
    "SA": run_sa,
    "MSQN": run_msqn,
    "GPSO": run_gpso,
    "RandomSearch": run_random_search,
}


def run_seed(master_seed: int, run: int) -> int:
    """Seed of run ``run``; independent streams for distinct (master, run)."""
    state = np.random.SeedSequence(master_seed, spawn_key=(run,)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def run_solver(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    return RUNNERS[cfg.algorithm](obj, cfg)


@dataclass
class ProtocolResult:
    results: list[RunResult]
    best_index: int
    reevaluated: list  # mpf value per run, or None when infeasible / no solution

    @property
    def best(self) -> RunResult:
        return self.results[self.best_index]


def coordinates(x) -> list[str]:
    """Shortest round-trip decimal strings of a binary64 point."""
    return [repr(float(c)) for c in x]


def run_protocol(
    spec: FunctionSpec,
    algorithm: str,
    runs: int = 20,
    master_seed: int = 0,
    config: SolverConfig | None = None,
    n: int | None = None,
    penalty_value: float = PENALTY,
    feasible_seed_init: bool = False,
    presample_budget: int = 100_000,
    workers: int = 1,
    digits: int = DEFAULT_DIGITS,
) -> ProtocolResult:
    """Run ``runs`` seeded runs and pick the best by high-precision value.

    With ``feasible_seed_init`` each run's initial population (or start set)
    is seeded with feasible points found by uniform pre-sampling.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    base = replace(config or SolverConfig(), algorithm=algorithm)
    obj = PenalizedObjective(spec, n, penalty_value)

    def one(r: int) -> RunResult:
        seed = run_seed(master_seed, r)
        cfg = replace(base, seed=seed)
        if feasible_seed_init:
            from ..feasibility import sample_feasible

            want = {"SA": 1, "MSQN": cfg.starts}.get(algorithm, cfg.population)
            budget = max(presample_budget, want)
            pts = sample_feasible(spec, budget, want, seed=seed, n=obj.dim)
            cfg = replace(cfg, initial_points=np.array(pts) if pts else None)
        return run_solver(obj, cfg)

    if workers > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(runs)))
    else:
        results = [one(r) for r in range(runs)]

    tree = spec.build(obj.dim)
    reevaluated = []
    for res in results:
        if res.best_x is None:
            reevaluated.append(None)
            continue
        out = eval_extended(tree, coordinates(res.best_x), digits=digits)
        reevaluated.append(out.value if out.feasible else None)
    ranked = [(0, v, i) if v is not None else (1, 0, i) for i, v in enumerate(reevaluated)]
    best_index = min(ranked)[2]
    return ProtocolResult(results, best_index, reevaluated)
