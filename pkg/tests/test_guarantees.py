import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stagewise import guarantees as G
from stagewise.boosters import AlgorithmConfig, run
from stagewise.oracles import delta_max, solve_lasso, solve_least_squares

from conftest import make_problem


@pytest.fixture
def c_t1(t1):
    return G.Constants.from_problem(t1, 1.0)


def test_lsboost_initial_bound_is_tight(t1, c_t1):
    b = G.lsboost_bounds(c_t1, 0)
    assert b["train_error_bound"] == pytest.approx(2.5, abs=1e-14)
    assert b["train_error_bound"] == pytest.approx(t1.null_loss - c_t1.loss_star, abs=1e-14)
    assert b["upper_sandwich"] == pytest.approx(t1.null_loss, abs=1e-14)


def test_lsboost_bounds_geometric(small):
    c = G.Constants.from_problem(small, 0.3)
    ks = np.arange(200)
    b = G.lsboost_bounds(c, ks)
    ratio = b["train_error_bound"][1:] / b["train_error_bound"][:-1]
    assert np.allclose(ratio, c.gamma, rtol=1e-12)
    for name in ("train_error_bound", "coeff_dist_bound", "prediction_dist_bound", "gradient_bound"):
        col = b[name]
        assert np.all(col >= 0) and np.all(np.diff(col) <= 0)


def test_lsboost_shrinkage_forms(small):
    c = G.Constants.from_problem(small, 0.5)
    ks = np.arange(500)
    b = G.lsboost_bounds(c, ks)
    # the observed-quantity version can only be tighter than the a priori estimate
    tr = run(small, AlgorithmConfig("lsboost", 0.5, 499))
    ls = solve_least_squares(small)
    pred = np.linalg.norm(tr.resids - (small.y - ls.fitted), axis=1)
    exact = G.lsboost_l1_bound(c, ks, pred)
    assert np.all(exact <= b["lk_estimate"] + 1e-12)
    assert np.all(tr.l1_norm <= exact * (1 + 1e-9) + 1e-12)
    assert np.all(tr.l1_norm <= b["l1_shrink_alt"] * (1 + 1e-9) + 1e-12)


def test_lsboost_extra_bounds_t1(t1, c_t1):
    tr = run(t1, AlgorithmConfig("lsboost", 1.0, 2))
    ls = solve_least_squares(t1)
    extra = G.lsboost_extra_bounds(c_t1, tr, 1, ls)
    assert extra["j_max"] == 1
    assert extra["l2_shrink_bound"] == pytest.approx(3.0, abs=1e-14)
    assert np.linalg.norm(tr.beta(1)) <= extra["l2_shrink_bound"] + 1e-14
    zero = G.lsboost_extra_bounds(c_t1, tr, 0, ls)
    assert zero["l2_shrink_bound"] == 0.0 and tr.inf_corr[0] / t1.n <= zero["gradient_bound"]


@pytest.mark.parametrize("eps", [0.05, 0.5, 1.0])
def test_lsboost_extra_bounds_hold(wide, eps):
    c = G.Constants.from_problem(wide, eps)
    ls = solve_least_squares(wide)
    tr = run(wide, AlgorithmConfig("lsboost", eps, 300))
    running = np.minimum.accumulate(tr.inf_corr) / wide.n
    for k in range(0, 300, 7):
        e = G.lsboost_extra_bounds(c, tr, k, ls)
        assert running[k] <= e["gradient_bound"] * (1 + 1e-9) + 1e-12
        assert np.linalg.norm(tr.beta(k)) <= e["l2_shrink_bound"] * (1 + 1e-9) + 1e-12
        assert tr.inf_corr[k] <= c.fitted_norm * c.gamma ** (k / 2) * (1 + 1e-9)


def test_fse_bound_t1(t1):
    c = G.Constants.from_problem(t1, 0.5)
    b = G.fse_bounds(c, 9)
    assert b["inf_corr_bound"] == pytest.approx(1.25, abs=1e-14)
    tr = run(t1, AlgorithmConfig("fse", 0.5, 9))
    assert tr.inf_corr.min() <= 1.25


def test_fse_train_limit(small):
    c = G.Constants.from_problem(small, 0.05)
    far = G.fse_bounds(c, 1e15)["train_error_bound"]
    assert far + c.loss_star == pytest.approx(G.fse_train_limit(c), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(0.1, 10.0), st.integers(0, 10_000))
def test_fse_correlation_bound_homogeneous(eps, scale, k):
    # eps -> c eps together with (k+1) -> (k+1)/c^2 scales the bound by exactly c
    c = G.Constants(10, 5, 0.5, 2.0, 0.0, eps)
    base = G.fse_bounds(c, k)["inf_corr_bound"]
    moved = G.fse_bounds(c.with_epsilon(scale * eps), (k + 1) / scale**2 - 1)["inf_corr_bound"]
    assert moved == pytest.approx(scale * base, rel=1e-10)


def test_fse_bracket_balanced_learning_rate(small):
    c = G.Constants.from_problem(small, 0.1)
    for k in (10, 100, 1000):
        grid = np.geomspace(1e-3, 10, 4001)
        vals = [G.fse_bounds(c.with_epsilon(e), k)["train_error_bound"] for e in grid]
        best = grid[int(np.argmin(vals))]
        assert best == pytest.approx(G.fse_balanced_epsilon(c, k), rel=5e-3)


def test_fse_tradeoff_matches_bound(small):
    c = G.Constants.from_problem(small, 0.02)
    ks = np.arange(0, 1000, 50)
    assert np.allclose(G.fse_tradeoff(c, ks * c.epsilon), G.fse_bounds(c, ks)["train_error_bound"])


def test_rfs_bounds_t1(t1):
    c = G.Constants.from_problem(t1, 0.5, delta=2.0)
    tr = run(t1, AlgorithmConfig("rfs", 0.5, 2, delta=2.0))
    b = G.rfs_bounds(c, np.arange(3))
    assert np.allclose(b["l1_shrink_bound"], [0.0, 0.5, 0.875], atol=1e-15)
    assert np.allclose(tr.l1_norm, b["l1_shrink_bound"], atol=1e-15)


def test_rfs_limits(small):
    c = G.Constants.from_problem(small, 0.05, delta=3.0)
    far = G.rfs_bounds(c, 1e15)
    assert far["train_gap_bound"] == pytest.approx(2 * 3.0 * 0.05 / small.n, rel=1e-9)
    shrink = G.rfs_bounds(c, np.arange(2000))["l1_shrink_bound"]
    assert np.all(np.diff(shrink) >= 0) and np.all(shrink <= 3.0)
    assert np.all(np.diff(shrink[:500]) > 0) and np.all(shrink[:500] < 3.0)
    assert shrink[-1] == pytest.approx(3.0, rel=1e-9)
    assert G.rfs_train_limit(c, 1.0) == pytest.approx(1.0 + 2 * 3.0 * 0.05 / small.n)


def test_path_bounds_reduce_to_rfs(small):
    c = G.Constants.from_problem(small, 0.05, delta=2.0)
    ks = np.arange(100)
    assert np.allclose(G.path_bounds(c, (2.0,) * 5, ks), G.rfs_bounds(c, ks)["train_gap_bound"])
    assert G.path_bounds(c, (1.0, 2.0), 1e15) == pytest.approx(2 * 2.0 * 0.05 / small.n, rel=1e-9)


def test_use_y_norm_is_looser(small):
    a = G.Constants.from_problem(small, 0.1)
    b = G.Constants.from_problem(small, 0.1, use_y_norm=True)
    assert b.fitted_norm >= a.fitted_norm
    assert np.all(G.lsboost_bounds(b, np.arange(50))["train_error_bound"]
                  >= G.lsboost_bounds(a, np.arange(50))["train_error_bound"])


def _lasso_at(prob, dm, budgets):
    out = []
    for d in budgets:
        if d <= 0:
            out.append(prob.null_loss)
        elif d >= dm:
            out.append(solve_least_squares(prob).loss_star)
        else:
            out.append(solve_lasso(prob, d).loss_star_delta)
    return np.array(out)


def test_sandwich_t1(t1, c_t1):
    lower, upper = G.sandwich(c_t1, [0.0], [t1.null_loss])
    assert upper[0] == pytest.approx(2.5) and lower[0] == pytest.approx(2.5)


@pytest.mark.parametrize("seed", range(3))
def test_sandwich_encloses_lsboost(seed):
    prob = make_problem(40, 8, 0.3, seed=seed)
    dm = delta_max(prob)
    for eps in (0.1, 1.0):
        c = G.Constants.from_problem(prob, eps)
        K = 1500
        tr = run(prob, AlgorithmConfig("lsboost", eps, K), store_vectors=False)
        ks = np.arange(K + 1)
        lk = G.lk_estimate(c, ks)
        sel = np.unique(np.r_[np.arange(0, 60), np.arange(60, K + 1, 40)])
        lasso = np.full(K + 1, np.nan)
        lasso[sel] = _lasso_at(prob, dm, lk[sel])
        lower, upper = G.sandwich(c, lk, lasso)
        obs = tr.train_error[sel]
        assert np.all(lower[sel] <= obs + 1e-9)
        assert np.all(obs <= upper[sel] + 1e-12)
        gap = upper[sel] - lower[sel]
        assert np.all(gap >= -1e-9)
        tail = lk[sel] >= dm  # lower envelope is flat at L* here, the upper one decays
        assert tail.any() and np.all(np.diff(gap[tail]) <= 1e-12)
        # far out the lower envelope sits at L* and the upper one decays to it
        k_far = 200 * K
        assert G.lk_estimate(c, k_far) >= dm
        assert G.lsboost_bounds(c, k_far)["upper_sandwich"] - c.loss_star <= 1e-6 * gap.max()
        if sel[tail][0] < K:
            assert lower[sel][tail][0] == pytest.approx(c.loss_star)


def test_theoretical_pairs(small):
    for eps in (0.01, 0.1, 1.0):
        c = G.Constants.from_problem(small, eps)
        train, l1 = G.theoretical_pairs(c, np.arange(300))
        assert np.all(np.diff(l1) >= 0) and np.all(np.diff(train) <= 0)
    c = G.Constants.from_problem(small, 0.1)
    train, l1 = G.theoretical_pairs(c, np.arange(300), "fse")
    assert np.allclose(l1, np.arange(300) * 0.1)


def test_build_profile(small):
    c = G.Constants.from_problem(small, 0.2, delta=1.0)
    for variant in ("lsboost", "fse", "rfs"):
        prof = G.build_profile(variant, c, np.arange(10))
        recs = list(prof.as_records())
        assert len(recs) == 10 and recs[3]["iter"] == 3
        assert all(v >= 0 for r in recs for v in r.values())
    prof = G.build_profile("path", c, np.arange(5), delta_grid=(1.0, 2.0))
    assert prof.column("avg_gap_bound").shape == (5,)
    with pytest.raises(ValueError):
        G.build_profile("fsek", c, np.arange(3))


def test_efficiency_examples():
    c = G.Constants(50, 10, 2.0, 3.0, 0.0, 1.0)
    t = math.exp(-0.5)
    rep = G.efficiency(c, t)
    assert rep.eta_continuous == pytest.approx(1 / math.e, rel=1e-12)
    assert rep.vartheta_continuous == pytest.approx(math.exp(-0.5), rel=1e-12)
    one = G.efficiency(c, 1.0)
    assert one.k_lsboost == 0 and one.eta_continuous == 0.0
    assert one.k_fse == math.ceil(4 * 10 / 2.0) - 1
    assert rep.eta <= 1 / math.e + 0.05
    with pytest.raises(ValueError):
        G.efficiency(c, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(1.0, 200.0))
def test_efficiency_ratios_bounded(tau, kappa):
    c = G.Constants(50, 100, 100 / kappa, 2.0, 0.0, 1.0)
    rep = G.efficiency(c, tau)
    assert rep.k_lsboost < rep.k_fse
    assert rep.eta_continuous <= 1 / math.e + 1e-12
    assert rep.vartheta_continuous <= math.exp(-0.5) + 1e-12
    # discrete ratios track the continuous ones up to rounding of the iteration counts
    a = 4 * kappa * math.log(1 / tau**2)
    b = 4 * kappa / tau**2
    assert rep.eta <= (a + 1) / (b - 1) + 1e-12
