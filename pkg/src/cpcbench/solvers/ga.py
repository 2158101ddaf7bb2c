"""Real-coded genetic algorithm."""

from __future__ import annotations

import numpy as np

from .base import Counter, PenalizedObjective, RunResult, SolverConfig, initial_population, rng_for


def _tournament(rng, f: np.ndarray, k: int, size: int) -> np.ndarray:
    cand = rng.integers(0, f.size, size=(k, size))
    winners = np.argmin(f[cand], axis=1)
    return cand[np.arange(k), winners]


def _mutation_factor(cfg: SolverConfig, gen: int) -> float:
    """Mutation scale relative to its start: geometric decay to
    ``mutation_final`` at the last generation, or linear shrink when
    ``mutation_final`` is None."""
    frac = gen / max(cfg.generations, 1)
    if cfg.mutation_final is not None:
        return cfg.mutation_final**frac
    return 1.0 - cfg.mutation_shrink * frac


def run_ga(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    """Tournament selection, blend crossover, Gaussian mutation, elitism."""
    rng = rng_for(cfg)
    counter = Counter(obj)
    n, m = obj.dim, cfg.population
    lo, hi = obj.lower, obj.upper
    sigma = cfg.mutation_sigma * obj.range
    pm = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / n
    elite_k = min(cfg.elitism, m)
    n_children = m - elite_k

    pop = initial_population(rng, obj, m, cfg)
    fit = counter.batch(pop)
    trace = [counter.best_f]

    for gen in range(cfg.generations):
        scale = sigma * _mutation_factor(cfg, gen)
        order = np.argsort(fit, kind="stable")
        elite = pop[order[:elite_k]]
        elite_f = fit[order[:elite_k]]

        n_pairs = (n_children + 1) // 2
        pa = pop[_tournament(rng, fit, n_pairs, cfg.tournament)]
        pb = pop[_tournament(rng, fit, n_pairs, cfg.tournament)]
        cross = rng.random(n_pairs) < cfg.crossover_rate
        low = np.minimum(pa, pb)
        span = np.abs(pa - pb)
        a = cfg.blend_alpha
        u1 = rng.random((n_pairs, n))
        u2 = rng.random((n_pairs, n))
        c1 = low - a * span + (1 + 2 * a) * span * u1
        c2 = low - a * span + (1 + 2 * a) * span * u2
        c1 = np.where(cross[:, None], c1, pa)
        c2 = np.where(cross[:, None], c2, pb)
        kids = np.concatenate([c1, c2])[:n_children]

        mutate = rng.random(kids.shape) < pm
        kids = kids + mutate * rng.normal(0.0, 1.0, kids.shape) * scale
        kids = np.clip(kids, lo, hi)

        kid_f = counter.batch(kids) if n_children else np.empty(0)
        pop = np.concatenate([elite, kids])
        fit = np.concatenate([elite_f, kid_f])
        trace.append(counter.best_f)

    return counter.result(trace, cfg)
