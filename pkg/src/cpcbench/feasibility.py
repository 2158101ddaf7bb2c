"""Monte Carlo feasible-ratio estimation and feasible-point pre-sampling.

Every run draws from its own substream ``SeedSequence(seed, spawn_key=(run,))``
and samples are consumed strictly in draw order, so results do not depend on
the chunk size or on how many worker threads share the runs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .expr.machine import evaluate_batch, feasible_mask
from .expr.nodes import Tree
from .suite import FunctionSpec

DEFAULT_CHUNK = 250_000


@dataclass(frozen=True)
class FrEstimate:
    per_run: tuple[float, ...]  # percent
    hits: tuple[int, ...]
    samples_per_run: int
    runs: int
    mean_percent: float
    total_samples: int
    binomial_stderr_percent: float

    @classmethod
    def from_hits(cls, hits, samples_per_run: int) -> "FrEstimate":
        hits = tuple(int(h) for h in hits)
        per_run = tuple(100.0 * h / samples_per_run for h in hits)
        total = samples_per_run * len(hits)
        p = sum(hits) / total
        return cls(
            per_run=per_run,
            hits=hits,
            samples_per_run=samples_per_run,
            runs=len(hits),
            mean_percent=float(np.mean(per_run)),
            total_samples=total,
            binomial_stderr_percent=100.0 * math.sqrt(p * (1 - p) / total),
        )

    def within(self, reference: float, abs_tol: float = 0.0, sigmas: float = 0.0) -> bool:
        """``|mean - reference| <= max(abs_tol, sigmas * stderr)``."""
        tol = max(abs_tol, sigmas * self.binomial_stderr_percent)
        return abs(self.mean_percent - reference) <= tol


def run_generator(seed: int, run: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run,))))


def _box(spec: FunctionSpec, n: int | None, bounds) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = spec.box(n)
    if bounds is not None:
        blo, bhi = bounds
        lo = np.broadcast_to(np.asarray(blo, dtype=np.float64), lo.shape).copy()
        hi = np.broadcast_to(np.asarray(bhi, dtype=np.float64), hi.shape).copy()
        if np.any(lo >= hi):
            raise ValueError("sub-box needs lo < hi in every coordinate")
    return lo, hi


def _uniform(rng: np.random.Generator, m: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    X = lo + (hi - lo) * rng.random((m, lo.size))
    # lo + (hi-lo)*u can round up to hi; keep the half-open convention
    return np.minimum(X, np.nextafter(hi, lo))


def _count_hits(tree: Tree, lo, hi, samples: int, seed: int, run: int, chunk: int) -> int:
    rng = run_generator(seed, run)
    hits = 0
    left = samples
    while left > 0:
        m = min(chunk, left)
        hits += int(np.count_nonzero(feasible_mask(tree, _uniform(rng, m, lo, hi))))
        left -= m
    return hits


def estimate_fr(
    spec: FunctionSpec,
    samples_per_run: int = 5_000_000,
    runs: int = 5,
    seed: int = 0,
    n: int | None = None,
    bounds=None,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> FrEstimate:
    """Percentage of uniform samples in the box at which ``spec`` is defined.

    ``bounds=(lo, hi)`` restricts sampling to a sub-box (scalars or per
    coordinate arrays). Feasibility is judged in binary64.
    """
    if samples_per_run < 1 or runs < 1:
        raise ValueError("samples_per_run and runs must be >= 1")
    tree = spec.build(n)
    lo, hi = _box(spec, n, bounds)

    def one(r):
        return _count_hits(tree, lo, hi, samples_per_run, seed, r, chunk)

    if workers > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(one, range(runs)))
    else:
        hits = [one(r) for r in range(runs)]
    return FrEstimate.from_hits(hits, samples_per_run)


def sample_feasible(
    spec: FunctionSpec,
    budget: int,
    want: int,
    seed: int = 0,
    n: int | None = None,
    bounds=None,
    chunk: int = 65_536,
) -> list[np.ndarray]:
    """Up to ``want`` feasible points among ``budget`` uniform draws, in draw order.

    A larger budget with the same seed returns a prefix-extension of the
    smaller budget's result.
    """
    if not 0 <= want <= budget:
        raise ValueError("need 0 <= want <= budget")
    out: list[np.ndarray] = []
    if want == 0:
        return out
    tree = spec.build(n)
    lo, hi = _box(spec, n, bounds)
    rng = run_generator(seed, 0)
    left = budget
    while left > 0 and len(out) < want:
        m = min(chunk, left)
        X = _uniform(rng, m, lo, hi)
        for i in np.flatnonzero(feasible_mask(tree, X)):
            out.append(X[i].copy())
            if len(out) == want:
                break
        left -= m
    return out


def grid_points(lo, hi, resolution: int) -> np.ndarray:
    """Cell-centred grid over a 2-D box, rows ordered x1-major."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.size != 2:
        raise ValueError("grid evaluation needs a 2-D function")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    axes = [lo[k] + (np.arange(resolution) + 0.5) * (hi[k] - lo[k]) / resolution for k in range(2)]
    g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def grid_evaluate(spec: FunctionSpec, resolution: int, bounds=None):
    """Evaluate a 2-D spec on a cell-centred grid: ``(points, values, feasible)``."""
    tree = spec.build()
    lo, hi = _box(spec, None, bounds)
    P = grid_points(lo, hi, resolution)
    values, ok = evaluate_batch(tree, P)
    return P, values, ok


def grid_census(spec: FunctionSpec, resolution: int, bounds=None) -> float:
    """Percentage of feasible grid cells (a deterministic FR oracle)."""
    _, _, ok = grid_evaluate(spec, resolution, bounds)
    return 100.0 * float(np.count_nonzero(ok)) / ok.size
