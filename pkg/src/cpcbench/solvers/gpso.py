"""Particle swarm with a gradient step on the global best."""

from __future__ import annotations

import numpy as np

from .base import Counter, PenalizedObjective, RunResult, SolverConfig, fd_gradient, initial_population, rng_for

_MAX_BACKTRACK = 20


def _refine(counter: Counter, x, fx, cfg: SolverConfig, budget: int, vmax):
    """One backtracking gradient-descent step; returns (x, fx, evals used)."""
    obj = counter.obj
    g, used = fd_gradient(counter.batch, x, fx, obj.lower, obj.upper, cfg.fd_step,
                          obj.penalty_value, budget=budget)
    if g is None:
        return x, fx, used
    norm = float(np.linalg.norm(g))
    if norm <= cfg.grad_tol or not np.isfinite(norm):
        return x, fx, used
    t = float(np.min(vmax)) / norm
    for _ in range(_MAX_BACKTRACK):
        if used >= budget:
            break
        y = np.clip(x - t * g, obj.lower, obj.upper)
        fy = counter(y)
        used += 1
        if fy < fx:
            return y, fy, used
        t *= 0.5
    return x, fx, used


def run_gpso(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    """Inertia-weight PSO; ``max_evals`` bounds every objective call."""
    rng = rng_for(cfg)
    counter = Counter(obj)
    m, n = cfg.population, obj.dim
    lo, hi = obj.lower, obj.upper
    vmax = cfg.velocity_clamp * obj.range

    X = initial_population(rng, obj, m, cfg)
    V = rng.uniform(-1.0, 1.0, (m, n)) * vmax
    F = counter.batch(X)
    P, PF = X.copy(), F.copy()
    gi = int(np.argmin(PF))
    gx, gf = P[gi].copy(), float(PF[gi])
    trace = [counter.best_f]

    while counter.evals + m <= cfg.max_evals:
        r1 = rng.random((m, n))
        r2 = rng.random((m, n))
        V = cfg.inertia * V + cfg.c1 * r1 * (P - X) + cfg.c2 * r2 * (gx - X)
        V = np.clip(V, -vmax, vmax)
        X = X + V
        out = (X < lo) | (X > hi)
        X = np.clip(X, lo, hi)
        V[out] = 0.0
        F = counter.batch(X)
        better = F < PF
        P[better] = X[better]
        PF[better] = F[better]
        gi = int(np.argmin(PF))
        if PF[gi] < gf:
            gx, gf = P[gi].copy(), float(PF[gi])
        budget = cfg.max_evals - counter.evals
        if gf < obj.penalty_value and budget > 0:
            gx, gf, _ = _refine(counter, gx, gf, cfg, budget, vmax)
        trace.append(counter.best_f)

    return counter.result(trace, cfg)
