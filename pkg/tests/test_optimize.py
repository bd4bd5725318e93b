import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_bh.optimize import (Kind, OptimizationError, OptimizerConfig, init_params,
                                  minimize)


def quadratic(x):
    return float(np.sum((x - 0.3) ** 2))


def rosenbrock(x):
    return float(np.sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2))


def test_lbfgs_quadratic():
    trace = minimize(quadratic, 5, OptimizerConfig(max_evaluations=2000))
    assert trace.best_cost < 1e-12
    assert np.allclose(trace.best_params, 0.3, atol=1e-6)
    assert trace.terminated_reason == "converged"


def test_lbfgs_rosenbrock():
    trace = minimize(rosenbrock, 2, OptimizerConfig(max_evaluations=20000), x0=np.array([-1.2, 1.0]))
    assert trace.best_cost < 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_cma_rosenbrock(seed):
    cfg = OptimizerConfig(Kind.CMA_ES, max_evaluations=20000, sigma0=0.5, seed=seed)
    trace = minimize(rosenbrock, 4, cfg, x0=np.zeros(4))
    assert trace.best_cost < 1e-8


def test_cma_noisy_quadratic():
    rng = np.random.default_rng(0)

    def noisy(x):
        return quadratic(x) + 0.01 * rng.standard_normal()

    cfg = OptimizerConfig(Kind.CMA_ES, max_evaluations=3000, sigma0=0.2, seed=1)
    trace = minimize(noisy, 4, cfg, x0=np.zeros(4))
    assert quadratic(trace.final_mean) < 0.05


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(list(Kind)), st.integers(1, 400), st.integers(1, 6))
def test_budget_never_exceeded(kind, budget, dim):
    calls = []

    def cost(x):
        calls.append(1)
        return rosenbrock(np.append(x, 0.0))

    trace = minimize(cost, dim, OptimizerConfig(kind, max_evaluations=budget))
    assert len(calls) == trace.n_evaluations <= budget


def test_lbfgs_spends_whole_budget_when_unconverged():
    trace = minimize(rosenbrock, 6, OptimizerConfig(max_evaluations=137), x0=np.full(6, -1.0))
    assert trace.n_evaluations == 137
    assert trace.terminated_reason == "budget"


def test_iteration_cap():
    trace = minimize(rosenbrock, 2, OptimizerConfig(max_evaluations=10**6, max_iterations=3),
                     x0=np.array([-1.2, 1.0]))
    assert trace.terminated_reason == "maxiter"
    assert trace.n_evaluations < 100


@pytest.mark.parametrize("kind", list(Kind))
def test_deterministic(kind):
    cfg = OptimizerConfig(kind, max_evaluations=500, seed=3)
    a = minimize(rosenbrock, 3, cfg)
    b = minimize(rosenbrock, 3, cfg)
    assert a.costs == b.costs and a.hashes == b.hashes


@pytest.mark.parametrize("kind", list(Kind))
def test_best_so_far_monotone(kind):
    trace = minimize(rosenbrock, 3, OptimizerConfig(kind, max_evaluations=300, sigma0=0.3))
    best = trace.best_so_far()
    assert np.all(np.diff(best) <= 0)
    assert best[-1] == trace.best_cost == min(trace.costs)
    assert rosenbrock(trace.best_params) == trace.best_cost


def test_init_params():
    x = init_params(1000, 0.1, 5)
    assert np.all(np.abs(x) <= 0.1)
    assert np.array_equal(x, init_params(1000, 0.1, 5))
    assert abs(x.mean()) < 0.01
    with pytest.raises(ValueError):
        init_params(3, 0.0, 0)


@pytest.mark.parametrize("kind", list(Kind))
def test_non_finite_cost_raises(kind):
    def bad(x):
        return np.nan if x[0] > 0.2 else -float(x[0])

    with pytest.raises(OptimizationError, match="params hash"):
        minimize(bad, 2, OptimizerConfig(kind, max_evaluations=100, sigma0=1.0), x0=np.zeros(2))


def test_config_validation_and_round_trip():
    cfg = OptimizerConfig(Kind.CMA_ES, max_evaluations=3000, sigma0=0.05, init_range=0.1, seed=4)
    assert OptimizerConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"kind": "cma_es", "lr": 0.1})
    with pytest.raises(ValueError):
        OptimizerConfig(max_evaluations=0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="adam")


def test_bad_x0():
    with pytest.raises(ValueError):
        minimize(quadratic, 3, OptimizerConfig(), x0=np.zeros(2))
    with pytest.raises(ValueError):
        minimize(quadratic, 0, OptimizerConfig())


def test_trace_csv():
    trace = minimize(quadratic, 1, OptimizerConfig(max_evaluations=9))
    lines = trace.to_csv().splitlines()
    assert lines[0] == "evaluation,cost"
    assert len(lines) == trace.n_evaluations + 1


@pytest.mark.parametrize("kind", list(Kind))
def test_target_cost_stops_early(kind):
    cfg = OptimizerConfig(kind, max_evaluations=20000, sigma0=0.3, target_cost=1e-3)
    trace = minimize(quadratic, 3, cfg)
    assert trace.terminated_reason == "target"
    assert trace.costs[-1] <= 1e-3 < min(trace.costs[:-1])
    assert np.array_equal(trace.final_mean, trace.best_params)


def _batched(fn):
    def cost(x):
        return fn(x)
    cost.batch = lambda xs: np.array([fn(x) for x in xs])
    return cost


def test_batched_gradient_path_matches_loop():
    x0 = np.array([-1.2, 1.0, 0.5])
    plain = minimize(rosenbrock, 3, OptimizerConfig(max_evaluations=300), x0=x0)
    batched = minimize(_batched(rosenbrock), 3, OptimizerConfig(max_evaluations=300), x0=x0)
    assert plain.costs == batched.costs
    assert plain.hashes == batched.hashes
    assert plain.terminated_reason == batched.terminated_reason


@pytest.mark.parametrize("budget", [1, 6, 7, 8, 50])
def test_batched_budget_exact(budget):
    calls = []

    def fn(x):
        calls.append(1)
        return quadratic(x)

    trace = minimize(_batched(fn), 3, OptimizerConfig(max_evaluations=budget))
    assert len(calls) == trace.n_evaluations <= budget


def test_batched_target_and_nan():
    trace = minimize(_batched(quadratic), 3, OptimizerConfig(target_cost=1e-4))
    assert trace.terminated_reason == "target" and trace.costs[-1] <= 1e-4

    def bad(x):
        return np.nan if x[0] > 0.2 else -float(x[0])

    with pytest.raises(OptimizationError):
        minimize(_batched(bad), 2, OptimizerConfig(max_evaluations=100), x0=np.zeros(2))
