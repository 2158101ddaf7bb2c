import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpcbench import suite
from cpcbench.expr import eval_machine
from cpcbench.feasibility import (
    FrEstimate,
    estimate_fr,
    grid_census,
    grid_points,
    run_generator,
    sample_feasible,
)

from conftest import oracle_df13

DF8_SUB = ([1.0, 2.5], [2.0, 3.0])


def test_unrestricted_function_is_fully_feasible():
    est = estimate_fr(suite.get("F138"), samples_per_run=20_000, runs=5, seed=0)
    assert est.mean_percent == 100.0
    assert est.per_run == (100.0,) * 5
    assert est.binomial_stderr_percent == 0.0


def test_estimate_fields():
    est = estimate_fr(suite.get("CPC-DF8"), samples_per_run=10_000, runs=3, seed=4)
    assert est.runs == 3 and len(est.per_run) == 3 and len(est.hits) == 3
    assert est.total_samples == 30_000
    assert est.mean_percent == pytest.approx(np.mean(est.per_run))
    assert 0 < est.binomial_stderr_percent < 1


def test_from_hits_and_within():
    est = FrEstimate.from_hits([10, 30], 100)
    assert est.per_run == (10.0, 30.0) and est.mean_percent == 20.0
    assert est.binomial_stderr_percent == pytest.approx(100 * (0.2 * 0.8 / 200) ** 0.5)
    assert est.within(21.0, abs_tol=1.0) and not est.within(25.0, abs_tol=1.0)
    assert est.within(25.0, sigmas=2)


def test_bad_arguments():
    spec = suite.get("CPC-DF8")
    with pytest.raises(ValueError):
        estimate_fr(spec, samples_per_run=0)
    with pytest.raises(ValueError):
        estimate_fr(spec, samples_per_run=10, bounds=([2, 2], [1, 3]))


def test_seed_determinism_independent_of_workers_and_chunk():
    spec = suite.get("CPC-DF8")
    a = estimate_fr(spec, samples_per_run=50_000, runs=4, seed=9, workers=1, chunk=50_000)
    b = estimate_fr(spec, samples_per_run=50_000, runs=4, seed=9, workers=3, chunk=7_000)
    assert a == b
    c = estimate_fr(spec, samples_per_run=50_000, runs=4, seed=10)
    assert c.hits != a.hits


def test_runs_are_distinct_streams():
    a = run_generator(0, 0).random(4)
    b = run_generator(0, 1).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, run_generator(0, 0).random(4))


def test_subbox_estimate_agrees_with_grid_census():
    spec = suite.get("CPC-DF8")
    est = estimate_fr(spec, samples_per_run=200_000, runs=5, seed=1, bounds=DF8_SUB)
    census = grid_census(spec, 1000, bounds=DF8_SUB)
    assert abs(est.mean_percent - census) <= 3 * est.binomial_stderr_percent + 0.01


def test_grid_points_are_cell_centred():
    P = grid_points(np.array([0.0, 0.0]), np.array([1.0, 2.0]), 2)
    assert sorted(map(tuple, P)) == [(0.25, 0.5), (0.25, 1.5), (0.75, 0.5), (0.75, 1.5)]


def test_sample_feasible_df8():
    spec = suite.get("CPC-DF8")
    tree = spec.build()
    pts = sample_feasible(spec, budget=20_000, want=50, seed=3)
    assert len(pts) == 50
    lo, hi = spec.box()
    for p in pts:
        assert eval_machine(tree, p).feasible
        assert np.all(p >= lo) and np.all(p < hi)


def test_sample_feasible_df13_comes_up_empty():
    spec = suite.get("CPC-DF13")
    pts = sample_feasible(spec, budget=10_000, want=5, seed=0)
    assert pts == []
    # confirm with the independent oracle on the same stream
    lo, hi = spec.box()
    X = lo + (hi - lo) * run_generator(0, 0).random((10_000, 2))
    assert all(oracle_df13(*x) is None for x in X)


def test_want_zero():
    assert sample_feasible(suite.get("CPC-DF8"), budget=100, want=0, seed=0) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 4000), st.integers(1, 4000))
def test_larger_budget_extends_prefix(seed, b1, extra):
    spec = suite.get("CPC-DF8")
    small = sample_feasible(spec, budget=b1, want=b1, seed=seed, chunk=997)
    large = sample_feasible(spec, budget=b1 + extra, want=b1 + extra, seed=seed, chunk=4096)
    assert len(large) >= len(small)
    for a, b in zip(small, large):
        assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_samples_stay_in_half_open_box(seed):
    spec = suite.get("F138")
    pts = np.array(sample_feasible(spec, budget=500, want=500, seed=seed, bounds=([0, 0], [1e-300, 1])))
    assert np.all(pts[:, 0] >= 0) and np.all(pts[:, 0] < 1e-300)
