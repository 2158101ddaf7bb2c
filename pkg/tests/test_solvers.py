import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpcbench import suite
from cpcbench.expr import eval_machine
from cpcbench.feasibility import run_generator, sample_feasible
from cpcbench.solvers import (
    PENALTY,
    PenalizedObjective,
    SolverConfig,
    penalize,
    run_protocol,
    run_seed,
    run_solver,
)
from cpcbench.solvers.base import fd_gradient

from conftest import oracle_df13

BOWL = """(function :id "BOWL" :dim 2 :bounds (-5 5) :sep true
          :best (("0" "0") "0") :expr (+ (pow x1 2) (pow x2 2)))"""

SMALL = dict(population=12, generations=6, iterations=30, starts=4, max_evals=120)


@pytest.fixture(scope="module")
def bowl():
    reg = suite.Registry()
    reg.load_text(BOWL)
    return reg.get("BOWL")


@pytest.fixture(scope="module")
def df8_obj():
    return penalize(suite.get("CPC-DF8"))


def test_penalty_contract_df13():
    spec = suite.get("CPC-DF13")
    obj = penalize(spec)
    tree = spec.build()
    X = spec.box()[0] + 200 * run_generator(3, 0).random((300, 2))
    vals = obj.batch(X)
    for x, v in zip(X, vals):
        if oracle_df13(*x) is None:
            assert v == 1e100
    feas = sample_feasible(spec, 200_000, 20, seed=1, bounds=([0, -1], [1.5, 1]))
    assert feas
    for x in feas:
        assert obj(x) == eval_machine(tree, x).value


def test_objective_hides_the_expression(df8_obj):
    assert df8_obj.dim == 2
    assert np.array_equal(df8_obj.range, [14.0, 14.0])
    assert not hasattr(df8_obj, "tree")


def test_custom_penalty_value():
    obj = PenalizedObjective(suite.get("CPC-DF13"), penalty_value=7.0)
    assert obj((0.0, 10.0)) == 7.0


@pytest.mark.parametrize("bad", [
    dict(algorithm="NM"),
    dict(population=0),
    dict(generations=-1),
    dict(algorithm="GPSO", population=50, max_evals=10),
    dict(elitism=5, population=3),
    dict(step_window=0),
])
def test_invalid_configs(bad):
    with pytest.raises(ValueError):
        SolverConfig(**bad)


def test_ga_population_one_zero_generations(df8_obj):
    cfg = SolverConfig(algorithm="GA", population=1, generations=0, seed=5)
    res = run_solver(df8_obj, cfg)
    x0 = df8_obj.lower + df8_obj.range * np.random.default_rng(5).random((1, 2))[0]
    assert res.evaluations_used == 1
    if res.feasible_found:
        assert np.array_equal(res.best_x, x0)
    else:
        assert res.best_x is None and res.reported_value == PENALTY


def test_sa_zero_iterations(df8_obj):
    res = run_solver(df8_obj, SolverConfig(algorithm="SA", iterations=0, seed=2))
    assert res.evaluations_used == 1


def test_gpso_budget_equal_population(df8_obj):
    res = run_solver(df8_obj, SolverConfig(algorithm="GPSO", population=30, max_evals=30, seed=2))
    assert res.evaluations_used == 30


@pytest.mark.parametrize("algorithm", ["GA", "SA", "MSQN", "GPSO", "RandomSearch"])
def test_budget_and_trace(df8_obj, algorithm):
    cfg = SolverConfig(algorithm=algorithm, seed=11, **SMALL)
    res = run_solver(df8_obj, cfg)
    if algorithm == "GA":
        assert res.evaluations_used == 12 + 6 * (12 - cfg.elitism)
    elif algorithm == "SA":
        assert res.evaluations_used == 1 + cfg.probe_samples + 30
    elif algorithm in ("GPSO", "RandomSearch"):
        assert res.evaluations_used <= 120
    trace = np.array(res.trace)
    assert np.all(np.diff(trace) <= 0)
    assert trace[-1] == res.reported_value
    if res.feasible_found:
        assert df8_obj(res.best_x) == res.reported_value
        assert np.all(res.best_x >= df8_obj.lower) and np.all(res.best_x <= df8_obj.upper)
    again = run_solver(df8_obj, cfg)
    assert again.reported_value == res.reported_value and again.trace == res.trace


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**63), st.integers(2, 40), st.integers(30, 200))
def test_gpso_never_exceeds_budget(seed, m, extra):
    obj = penalize(suite.get("CPC-DF8"))
    res = run_solver(obj, SolverConfig(algorithm="GPSO", population=m, max_evals=m + extra, seed=seed))
    assert res.evaluations_used <= m + extra


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["GA", "SA", "MSQN", "GPSO", "RandomSearch"]), st.integers(0, 2**63))
def test_reported_value_matches_contract(algorithm, seed):
    obj = penalize(suite.get("CPC-DF8"))
    res = run_solver(obj, SolverConfig(algorithm=algorithm, seed=seed, **SMALL))
    if res.feasible_found:
        assert res.reported_value < PENALTY and obj(res.best_x) == res.reported_value
    else:
        assert res.best_x is None and res.reported_value == PENALTY


def test_msqn_convex_bowl(bowl):
    obj = penalize(bowl)
    res = run_solver(obj, SolverConfig(algorithm="MSQN", starts=3, iterations=100, seed=0))
    assert res.feasible_found
    assert res.reported_value <= 1e-8


def test_msqn_all_starts_infeasible_on_df13():
    spec = suite.get("CPC-DF13")
    cfg = SolverConfig(algorithm="MSQN", starts=10, seed=123)
    starts = spec.box()[0] + 200 * np.random.default_rng(123).random((10, 2))
    assert all(oracle_df13(*x) is None for x in starts)
    res = run_solver(penalize(spec), cfg)
    assert not res.feasible_found
    assert res.reported_value == 1e100 and res.best_x is None
    assert res.evaluations_used == 10


def test_fd_gradient_switches_side_at_cliff():
    # f = x where x < 1, penalized at x >= 1
    def f(P):
        return np.where(P[:, 0] < 1.0, P[:, 0], PENALTY)

    x = np.array([1.0 - 1e-9])
    g, evals = fd_gradient(f, x, float(x[0]), np.array([0.0]), np.array([2.0]), 1e-7, PENALTY)
    assert evals == 2 and g[0] == pytest.approx(1.0)


def test_feasible_seed_init_helps_gpso_on_df13():
    spec = suite.get("CPC-DF13")
    cfg = SolverConfig(population=10, max_evals=40)
    plain = run_protocol(spec, "GPSO", runs=2, master_seed=1, config=cfg)
    assert not any(r.feasible_found for r in plain.results)
    # sub-box presampling is not exposed, so use a large budget on the full box
    seeded = run_protocol(spec, "GPSO", runs=1, master_seed=1, config=cfg,
                          feasible_seed_init=True, presample_budget=3_000_000)
    assert seeded.best.feasible_found


def test_run_seed_is_stable_and_distinct():
    assert run_seed(2024, 0) == run_seed(2024, 0)
    assert len({run_seed(2024, r) for r in range(100)}) == 100
    assert run_seed(1, 0) != run_seed(2, 0)


def test_protocol_single_run(df8_obj):
    spec = suite.get("CPC-DF8")
    p = run_protocol(spec, "GA", runs=1, master_seed=3, config=SolverConfig(**SMALL))
    assert p.best_index == 0 and len(p.results) == 1
    assert p.best.seed == run_seed(3, 0)


def test_protocol_determinism_and_workers():
    spec = suite.get("CPC-DF8")
    cfg = SolverConfig(**SMALL)
    a = run_protocol(spec, "SA", runs=6, master_seed=8, config=cfg, workers=1)
    b = run_protocol(spec, "SA", runs=6, master_seed=8, config=cfg, workers=3)
    assert [r.reported_value for r in a.results] == [r.reported_value for r in b.results]
    assert a.best_index == b.best_index


def test_protocol_selects_lowest_reevaluated_value():
    spec = suite.get("CPC-DF8")
    p = run_protocol(spec, "RandomSearch", runs=8, master_seed=4, config=SolverConfig(max_evals=50))
    feasible = [(v, i) for i, v in enumerate(p.reevaluated) if v is not None]
    assert feasible
    assert p.best_index == min(feasible)[1]


def test_protocol_with_no_feasible_run():
    spec = suite.get("CPC-DF13")
    p = run_protocol(spec, "MSQN", runs=3, master_seed=0, config=SolverConfig(starts=5))
    assert p.reevaluated == [None, None, None]
    assert not p.best.feasible_found


@pytest.mark.parametrize("algorithm", ["GA", "SA", "GPSO"])
def test_comparators_solve_step_function(algorithm):
    spec = suite.get("F138")
    p = run_protocol(spec, algorithm, runs=3, master_seed=0,
                     config=SolverConfig(population=60, generations=60, iterations=600, max_evals=6000))
    assert p.best.reported_value == 0.0
