"""Penalized objective, solver configuration and run results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..expr.machine import evaluate_batch
from ..suite import FunctionSpec

PENALTY = 1e100
ALGORITHMS = ("GA", "SA", "MSQN", "GPSO", "RandomSearch")


class PenalizedObjective:
    """Total objective: the function value where defined, ``penalty_value`` elsewhere.

    Solvers only see values through this object; it exposes the box but not
    the expression or its domain conditions.
    """

    def __init__(self, spec: FunctionSpec, n: int | None = None, penalty_value: float = PENALTY):
        self.spec = spec
        self.dim = spec.resolve_n(n)
        self.penalty_value = float(penalty_value)
        self._tree = spec.build(self.dim)
        self.lower, self.upper = spec.box(self.dim)

    @property
    def range(self) -> np.ndarray:
        return self.upper - self.lower

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        values, ok = evaluate_batch(self._tree, X)
        return np.where(ok, values, self.penalty_value)

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def penalize(spec: FunctionSpec, n: int | None = None, penalty_value: float = PENALTY) -> PenalizedObjective:
    return PenalizedObjective(spec, n, penalty_value)


@dataclass
class SolverConfig:
    algorithm: str = "GA"
    seed: int = 0
    population: int = 2000
    generations: int = 2000  # GA
    iterations: int = 2000  # SA; MSQN per start
    starts: int = 2000  # MSQN
    max_evals: int = 100_000  # GPSO, RandomSearch
    # GA
    tournament: int = 2
    blend_alpha: float = 0.5
    crossover_rate: float = 0.8
    mutation_sigma: float = 0.1  # fraction of the range
    mutation_rate: float | None = None  # default 1/dim
    elitism: int = 1
    mutation_shrink: float = 1.0  # linear schedule; 0 keeps sigma fixed
    mutation_final: float | None = 1e-4  # geometric schedule end ratio
    # SA
    cooling: float = 0.95
    step_fraction: float = 0.1
    step_window: int = 10
    reanneal_after: int = 100
    reanneal_from_best: bool = True
    probe_samples: int = 20
    # PSO
    inertia: float = 0.7298
    c1: float = 1.4962
    c2: float = 1.4962
    velocity_clamp: float = 0.2
    # gradients (MSQN, GPSO refinement)
    fd_step: float = 1e-7
    grad_tol: float = 1e-10
    # optional initial points (feasible pre-sampling)
    initial_points: Sequence | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.population < 1 or self.starts < 1:
            raise ValueError("population and starts must be positive")
        if self.generations < 0 or self.iterations < 0 or self.max_evals < 1:
            raise ValueError("budgets must be non-negative")
        if self.algorithm == "GPSO" and self.max_evals < self.population:
            raise ValueError("GPSO needs max_evals >= population")
        if not 0 <= self.elitism <= self.population:
            raise ValueError("elitism must lie in [0, population]")
        if self.step_window < 1:
            raise ValueError("step_window must be positive")
        if self.tournament < 1:
            raise ValueError("tournament size must be positive")


@dataclass
class RunResult:
    best_x: np.ndarray | None
    reported_value: float
    evaluations_used: int
    feasible_found: bool
    trace: tuple[float, ...] = ()
    algorithm: str = ""
    seed: int = 0


class Counter:
    """Counts objective evaluations and tracks the best point seen."""

    def __init__(self, obj: PenalizedObjective):
        self.obj = obj
        self.evals = 0
        self.best_x: np.ndarray | None = None
        self.best_f = np.inf

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        f = self.obj.batch(X)
        self.evals += X.shape[0]
        i = int(np.argmin(f))
        if f[i] < self.best_f:
            self.best_f = float(f[i])
            self.best_x = X[i].copy()
        return f

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def result(self, trace, cfg: SolverConfig) -> RunResult:
        pen = self.obj.penalty_value
        found = self.best_x is not None and self.best_f < pen
        return RunResult(
            best_x=self.best_x.copy() if found else None,
            reported_value=self.best_f if found else pen,
            evaluations_used=self.evals,
            feasible_found=bool(found),
            trace=tuple(trace),
            algorithm=cfg.algorithm,
            seed=cfg.seed,
        )


def rng_for(cfg: SolverConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.seed)


def initial_population(rng, obj: PenalizedObjective, m: int, cfg: SolverConfig) -> np.ndarray:
    X = obj.lower + obj.range * rng.random((m, obj.dim))
    if cfg.initial_points is not None and len(cfg.initial_points):
        P = np.asarray(cfg.initial_points, dtype=np.float64).reshape(-1, obj.dim)[:m]
        X[: len(P)] = P
    return X


def fd_gradient(f, x: np.ndarray, fx: float, lower, upper, rel_step: float, penalty: float,
                budget: int | None = None):
    """Forward-difference gradient with a one-sided switch at the penalty cliff.

    ``f`` evaluates a batch of points. When the forward probe is penalized or
    leaves the box, the backward difference is used; if both sides are
    penalized the component is zero. Returns ``(grad, evals)`` or
    ``(None, evals)`` when ``budget`` cannot cover the probes.
    """
    n = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    fwd = x + h > upper
    steps = np.where(fwd, -h, h)
    if budget is not None and budget < n:
        return None, 0
    P = np.repeat(x[None, :], n, axis=0)
    P[np.arange(n), np.arange(n)] += steps
    fp = f(P)
    evals = n
    g = (fp - fx) / steps
    bad = fp >= penalty
    if np.any(bad):
        idx = np.flatnonzero(bad)
        if budget is not None and budget - evals < idx.size:
            g[idx] = 0.0
            return g, evals
        Q = np.repeat(x[None, :], idx.size, axis=0)
        Q[np.arange(idx.size), idx] -= steps[idx]
        inside = (Q[np.arange(idx.size), idx] >= lower[idx]) & (Q[np.arange(idx.size), idx] <= upper[idx])
        fq = f(Q)
        evals += idx.size
        ok = (fq < penalty) & inside
        g[idx] = np.where(ok, (fx - fq) / steps[idx], 0.0)
    return g, evals
