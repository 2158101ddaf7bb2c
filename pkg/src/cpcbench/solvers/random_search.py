"""Uniform random search (a budget-matched baseline)."""

from __future__ import annotations

from .base import Counter, PenalizedObjective, RunResult, SolverConfig, initial_population, rng_for

_CHUNK = 10_000


def run_random_search(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    rng = rng_for(cfg)
    counter = Counter(obj)
    trace = []
    first = True
    while counter.evals < cfg.max_evals:
        m = min(_CHUNK, cfg.max_evals - counter.evals)
        if first:
            X = initial_population(rng, obj, m, cfg)
            first = False
        else:
            X = obj.lower + obj.range * rng.random((m, obj.dim))
        counter.batch(X)
        trace.append(counter.best_f)
    return counter.result(trace, cfg)
