import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stagewise.boosters import AlgorithmConfig, run
from stagewise.errors import ConfigError
from stagewise.oracles import delta_max, solve_least_squares
from stagewise.subgrad import (
    ResidualObjective,
    descend,
    elementary_sequence_check,
    evaluate,
    lsboost_steps,
    sd_bound,
    subgradient,
)

from conftest import make_problem


def test_evaluate_examples(t1):
    assert evaluate(ResidualObjective.cm(t1), np.zeros(2)) == 0.0
    rcm = ResidualObjective.rcm(t1, 1.0)
    assert evaluate(rcm, np.array([3.0, 1.0])) == 3.0
    assert evaluate(rcm, np.array([2.0, 1.0])) == 2.5


def test_cm_vanishes_at_least_squares_residual(small):
    ls = solve_least_squares(small)
    assert evaluate(ResidualObjective.cm(small), small.y - ls.fitted) <= 1e-12


def test_subgradient_examples(t1):
    assert np.array_equal(subgradient(ResidualObjective.cm(t1), [3.0, 1.0]), [1.0, 0.0])
    assert np.array_equal(subgradient(ResidualObjective.rcm(t1, 2.0), [3.0, 1.0]), [1.0, 0.0])


def test_objective_validation(t1):
    with pytest.raises(ConfigError):
        ResidualObjective("xx", t1)
    with pytest.raises(ConfigError):
        ResidualObjective.rcm(t1, 0.0)


@pytest.mark.parametrize("kind", ["cm", "rcm"])
def test_subgradient_inequality(kind):
    rng = np.random.default_rng(5)
    for seed in range(3):
        prob = make_problem(20, 12, 0.4, seed=seed)
        obj = ResidualObjective(kind, prob, 1.7 if kind == "rcm" else math.inf)
        for _ in range(100):
            r = prob.y - prob.X @ rng.standard_normal(prob.p)
            r2 = prob.y - prob.X @ rng.standard_normal(prob.p)
            g = subgradient(obj, r)
            assert evaluate(obj, r2) >= evaluate(obj, r) + g @ (r2 - r) - 1e-9


def test_subgradient_norms(small):
    dm = delta_max(small)
    cm = ResidualObjective.cm(small)
    rcm = ResidualObjective.rcm(small, 0.5 * dm)
    for st_ in descend(cm, 0.05, 50):
        assert np.linalg.norm(st_.grad) == pytest.approx(1.0, abs=1e-12)
    for st_ in descend(rcm, 0.05, 200):
        assert np.abs(st_.beta_shadow).sum() <= 0.5 * dm + 1e-10
        assert np.linalg.norm(st_.grad) <= 2.0 + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_fse_is_cm_descent(seed):
    prob = make_problem(25, 30, 0.5, seed=seed)
    tr = run(prob, AlgorithmConfig("fse", 0.05, 150))
    states = descend(ResidualObjective.cm(prob), 0.05, 150)
    assert np.max(np.abs(tr.resids - np.array([s.r for s in states]))) <= 1e-12
    assert np.max(np.abs(tr.betas - np.array([s.beta_shadow for s in states]))) <= 1e-12


@pytest.mark.parametrize("eps", [1.0, 0.2])
def test_lsboost_is_scheduled_cm_descent(small, eps):
    tr = run(small, AlgorithmConfig("lsboost", eps, 150))
    states = descend(ResidualObjective.cm(small), lsboost_steps(eps), 150)
    assert np.max(np.abs(tr.resids - np.array([s.r for s in states]))) <= 1e-12
    assert np.max(np.abs(tr.betas - np.array([s.beta_shadow for s in states]))) <= 1e-12


def test_rfs_is_rcm_descent(wide):
    d = 0.3 * delta_max(wide)
    tr = run(wide, AlgorithmConfig("rfs", 0.02, 150, delta=d))
    states = descend(ResidualObjective.rcm(wide, d), 0.02, 150)
    assert np.max(np.abs(tr.resids - np.array([s.r for s in states]))) <= 1e-12
    assert np.max(np.abs(tr.betas - np.array([s.beta_shadow for s in states]))) <= 1e-12


def test_sequence_step_sizes(small):
    states = descend(ResidualObjective.cm(small), [0.1, 0.0, 0.2], 3)
    assert np.array_equal(states[1].r, states[2].r)
    with pytest.raises(ConfigError):
        descend(ResidualObjective.cm(small), -0.1, 2)


def test_sd_bound_examples():
    assert sd_bound(math.sqrt(10), 1.0, 0.5, 9) == pytest.approx(1.25, abs=1e-15)
    assert sd_bound(1.0, 1.0, 1e-12, 5) > 1e10


def test_sd_bound_dominates_fse_on_t1(t1):
    eps = 0.5
    states = descend(ResidualObjective.cm(t1), eps, 30)
    d0 = solve_least_squares(t1).fitted_norm  # distance from y to the LS residual
    best = np.minimum.accumulate([s.value for s in states])
    for k, v in enumerate(best):
        assert v <= sd_bound(d0, 1.0, eps, k) + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5000), st.floats(0.005, 0.3), st.sampled_from(["cm", "rcm"]))
def test_elementary_sequence_bound(seed, alpha, kind):
    prob = make_problem(15, 9, 0.2, seed=seed)
    delta = 2.0
    obj = ResidualObjective(kind, prob, delta if kind == "rcm" else math.inf)
    states = descend(obj, alpha, 60)
    rng = np.random.default_rng(seed)
    x = prob.y - prob.X @ rng.standard_normal(prob.p)
    pts = np.array([s.r for s in states[:-1]])
    grads = np.array([s.grad for s in states[:-1]])
    G = float(np.max(np.linalg.norm(grads, axis=1)))
    lhs, rhs = elementary_sequence_check(pts, grads, x, alpha, G)
    assert lhs <= rhs + 1e-9
