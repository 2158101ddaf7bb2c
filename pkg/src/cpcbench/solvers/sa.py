"""Single-solution simulated annealing."""

from __future__ import annotations

import math

import numpy as np

from .base import Counter, PenalizedObjective, RunResult, SolverConfig, initial_population, rng_for


def _initial_temperature(values: np.ndarray, penalty: float) -> float:
    finite = values[values < penalty]
    if finite.size >= 2:
        spread = float(np.std(finite))
        if spread > 0 and math.isfinite(spread):
            return spread
    return 1.0


def _adapt(step: float, ratio: float) -> float:
    # keep the per-coordinate acceptance ratio near one half
    if ratio > 0.6:
        return step * (1 + 2 * (ratio - 0.6) / 0.4)
    if ratio < 0.4:
        return step / (1 + 2 * (0.4 - ratio) / 0.4)
    return step


def run_sa(obj: PenalizedObjective, cfg: SolverConfig) -> RunResult:
    """Coordinate-cycling Gaussian proposals with T_k = T0 * cooling**k.

    ``T0`` is the spread of the objective over a few uniform probes. Each
    coordinate keeps its own proposal scale, starting at
    ``step_fraction * range`` and adapted every ``step_window`` trials so
    that about half of the moves are accepted; without this, coordinates with
    weak curvature random-walk at any temperature calibrated on the box. After
    ``reanneal_after`` iterations without a new best, the chain restarts from
    the best point at the initial temperature.
    """
    rng = rng_for(cfg)
    counter = Counter(obj)
    lo, hi = obj.lower, obj.upper

    x = initial_population(rng, obj, 1, cfg)[0]
    fx = counter(x)
    trace = [counter.best_f]
    if cfg.iterations == 0:
        return counter.result(trace, cfg)

    probes = obj.lower + obj.range * rng.random((cfg.probe_samples, obj.dim))
    pf = counter.batch(probes) if cfg.probe_samples else np.empty(0)
    t0 = _initial_temperature(np.append(pf, fx), obj.penalty_value)
    # the probes are only for calibration; the chain starts at x
    step = cfg.step_fraction * obj.range.astype(float)
    accepted = np.zeros(obj.dim, dtype=int)
    tried = np.zeros(obj.dim, dtype=int)
    k = 0
    stale = 0

    for it in range(cfg.iterations):
        t = t0 * cfg.cooling**k
        j = it % obj.dim
        y = x.copy()
        y[j] = min(max(y[j] + rng.normal() * step[j], lo[j]), hi[j])
        before = counter.best_f
        fy = counter(y)
        u = rng.random()
        delta = fy - fx
        tried[j] += 1
        if delta <= 0 or (t > 0 and u < math.exp(-delta / t)):
            x, fx = y, fy
            accepted[j] += 1
        if tried[j] >= cfg.step_window:
            step[j] = min(_adapt(step[j], accepted[j] / tried[j]), obj.range[j])
            accepted[j] = tried[j] = 0
        k += 1
        stale = 0 if counter.best_f < before else stale + 1
        if stale >= cfg.reanneal_after and counter.best_x is not None:
            if cfg.reanneal_from_best:
                x, fx = counter.best_x.copy(), counter.best_f
            k = 0
            stale = 0
        trace.append(counter.best_f)

    return counter.result(trace, cfg)
