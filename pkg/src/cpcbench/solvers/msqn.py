"""Multi-start BFGS with finite-difference gradients."""

from __future__ import annotations

import numpy as np

from .base import Counter, PenalizedObjective, RunResult, SolverConfig, fd_gradient, initial_population, rng_for

_ARMIJO_C = 1e-4
_MAX_BACKTRACK = 40


def _bfgs(counter: Counter, x: np.ndarray, fx: float, cfg: SolverConfig) -> None:
    obj = counter.obj
    lo, hi, pen = obj.lower, obj.upper, obj.penalty_value
    n = x.size
    H = np.eye(n)
    g, _ = fd_gradient(counter.batch, x, fx, lo, hi, cfg.fd_step, pen)
    for _ in range(cfg.iterations):
        if not np.all(np.isfinite(g)) or np.max(np.abs(g)) <= cfg.grad_tol:
            return
        d = -H @ g
        slope = float(g @ d)
        if slope >= 0:  # lost descent direction: reset to steepest descent
            H = np.eye(n)
            d = -g
            slope = float(g @ d)
        t = 1.0
        for _ in range(_MAX_BACKTRACK):
            y = np.clip(x + t * d, lo, hi)
            fy = counter(y)
            if fy < pen and fy <= fx + _ARMIJO_C * t * slope:
                break
            t *= 0.5
        else:
            return
        s = y - x
        if not np.any(s):
            return
        g_new, _ = fd_gradient(counter.batch, y, fy, lo, hi, cfg.fd_step, pen)
        yk = g_new - g
        sy = float(s @ yk)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(yk) + 1e-300):
            rho = 1.0 / sy
            I = np.eye(n)
            H = (I - rho * np.outer(s, yk)) @ H @ (I - rho * np.outer(yk, s)) + rho * np.outer(s, s)
        x, fx, g = y, fy, g_new


def run_msqn(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    """Run BFGS from ``starts`` uniform points; infeasible starts stop at once."""
    rng = rng_for(cfg)
    counter = Counter(obj)
    X = initial_population(rng, obj, cfg.starts, cfg)
    F = counter.batch(X)
    trace = [counter.best_f]
    for x, fx in zip(X, F):
        if fx < obj.penalty_value:
            _bfgs(counter, x.copy(), float(fx), cfg)
        trace.append(counter.best_f)
    return counter.result(trace, cfg)
