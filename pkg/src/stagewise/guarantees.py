"""Closed-form convergence bounds, profile curves and efficiency ratios.

All a priori bounds depend only on (n, p, lambda_pmin, ||X beta_LS||,
L_n*) and the algorithm parameters; nothing here reads a trace except
:func:`lsboost_extra_bounds`, whose l2 bound needs visit counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .oracles import solve_least_squares
from .spectral import analyze, check_epsilon


@dataclass(frozen=True)
class Constants:
    n: int
    p: int
    lambda_pmin: float
    fitted_norm: float
    loss_star: float
    epsilon: float
    delta: float = math.inf
    gamma_offset: float = 0.0  # nonzero only for negative-control self-tests

    @classmethod
    def from_problem(cls, problem, epsilon, delta=math.inf, summary=None, ls=None,
                     use_y_norm=False):
        """Collect constants; ``use_y_norm`` swaps ||y|| in for ||X beta_LS||."""
        summary = summary or analyze(problem)
        ls = ls or solve_least_squares(problem, summary)
        norm = float(np.linalg.norm(problem.y)) if use_y_norm else ls.fitted_norm
        return cls(problem.n, problem.p, summary.lambda_pmin, norm, ls.loss_star,
                   float(epsilon), float(delta))

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=float(epsilon))

    def with_delta(self, delta):
        return replace(self, delta=float(delta))

    @property
    def kappa(self):
        return self.p / self.lambda_pmin

    @property
    def gamma(self):
        check_epsilon(self.epsilon)
        e = self.epsilon
        return 1.0 - e * (2.0 - e) * self.lambda_pmin / (4.0 * self.p) + self.gamma_offset


def _k(k):
    return np.asarray(k, dtype=float)


# ------------------------------------------------------------ LS-Boost


def lk_estimate(c, k):
    """Crude a priori l1 budget min{N sqrt(k eps/(2-eps)), eps N (1-g^(k/2))/(1-sqrt g)}."""
    k = _k(k)
    e, N, g = c.epsilon, c.fitted_norm, c.gamma
    first = N * np.sqrt(k * e / (2.0 - e))
    second = e * N * (1.0 - g ** (k / 2.0)) / (1.0 - math.sqrt(g))
    return np.minimum(first, second)


def lsboost_bounds(c, k):
    """Closed-form bounds for LS-Boost after k iterations (vectorized over k)."""
    k = _k(k)
    e, N, g, n = c.epsilon, c.fitted_norm, c.gamma, c.n
    decay = g ** (k / 2.0)
    lk = lk_estimate(c, k)
    train = N * N * g**k / (2.0 * n)
    return {
        "train_error_bound": train,
        "coeff_dist_bound": N * decay / math.sqrt(c.lambda_pmin),
        "prediction_dist_bound": N * decay,
        "gradient_bound": N * decay / n,
        "l1_shrink_bound": lk,
        "l1_shrink_alt": N * np.minimum(np.sqrt(k * e), e / (1.0 - math.sqrt(g))),
        "lk_estimate": lk,
        "upper_sandwich": train + c.loss_star,
        "l0_bound": k,
    }


def lsboost_l1_bound(c, k, prediction_dist):
    """Shrinkage bound using the observed ||X beta_LS - X beta^k||."""
    k = _k(k)
    e, N, g = c.epsilon, c.fitted_norm, c.gamma
    inner = np.maximum(N * N - np.asarray(prediction_dist) ** 2, 0.0)
    first = np.sqrt(k) * math.sqrt(e / (2.0 - e)) * np.sqrt(inner)
    second = e * N * (1.0 - g ** (k / 2.0)) / (1.0 - math.sqrt(g))
    return np.minimum(first, second)


def lsboost_extra_bounds(c, trace, k, ls):
    """Gradient bound (needs beta^{k+1}) and l2 shrinkage bound (needs visit counts)."""
    e, N, g, n = c.epsilon, c.fitted_norm, c.gamma, c.n
    geometric = N * g ** (k / 2.0) / n
    if k + 1 <= trace.n_iters:
        d_next = np.linalg.norm(trace.resid(k + 1) - (trace.resid(0) - ls.fitted))
        first = math.sqrt(max(N * N - d_next * d_next, 0.0)) / (
            n * math.sqrt(e * (2.0 - e) * (k + 1)))
        grad = min(first, geometric)
    else:
        grad = geometric
    moves = trace.j[1 : k + 1]
    j_max = int(np.bincount(moves, minlength=1).max()) if moves.size else 0
    d_k = np.linalg.norm(trace.resid(k) - (trace.resid(0) - ls.fitted))
    l2 = math.sqrt(j_max) * math.sqrt(e / (2.0 - e)) * math.sqrt(max(N * N - d_k * d_k, 0.0))
    return {"gradient_bound": grad, "l2_shrink_bound": l2, "j_max": j_max}


# ------------------------------------------------------------ FS_eps


def _fse_bracket(c, k):
    return c.fitted_norm**2 / (c.epsilon * (_k(k) + 1.0)) + c.epsilon


def fse_bounds(c, k):
    """Bounds for FS_eps; each holds at some i <= k (in particular at the
    iterate with the smallest ||X'r||_inf)."""
    k = _k(k)
    b = _fse_bracket(c, k)
    lam, p, n, e = c.lambda_pmin, c.p, c.n, c.epsilon
    return {
        "train_error_bound": p / (2.0 * n * lam) * b * b,
        "coeff_dist_bound": math.sqrt(p) / lam * b,
        "prediction_dist_bound": math.sqrt(p) / math.sqrt(lam) * b,
        "inf_corr_bound": c.fitted_norm**2 / (2.0 * e * (k + 1.0)) + e / 2.0,
        "l1_shrink_bound": k * e,
        "l0_bound": k,
    }


def fse_train_limit(c):
    """k -> infinity limit of the FS_eps training error: L* + p eps^2 / (2 n lambda_pmin)."""
    return c.loss_star + c.p * c.epsilon**2 / (2.0 * c.n * c.lambda_pmin)


def fse_tradeoff(c, sbound):
    """TBound as a function of SBound = k eps."""
    s = np.asarray(sbound, dtype=float)
    b = c.fitted_norm**2 / (s + c.epsilon) + c.epsilon
    return c.p / (2.0 * c.n * c.lambda_pmin) * b * b


def fse_balanced_epsilon(c, k):
    """Learning rate minimizing the FS_eps bracket at iteration k."""
    return c.fitted_norm / math.sqrt(k + 1.0)


# ------------------------------------------------------------ R-FS


def rfs_bounds(c, k):
    k = _k(k)
    e, d, N, n = c.epsilon, c.delta, c.fitted_norm, c.n
    avg_omega = N * N / (2.0 * e * (k + 1.0)) + 2.0 * e
    return {
        "train_gap_bound": d / n * avg_omega,
        "prediction_dist_bound": np.sqrt(d * N * N / (e * (k + 1.0)) + 4.0 * d * e),
        "l1_shrink_bound": d * (1.0 - (1.0 - e / d) ** k),
        "omega_bound": avg_omega,
        "l0_bound": k,
    }


def rfs_train_limit(c, lasso_loss):
    return lasso_loss + 2.0 * c.delta * c.epsilon / c.n


def path_bounds(c, delta_grid, k, delta_bar=None):
    """Bound on the profile-averaged suboptimality after k iterations.

    ``delta_bar`` defaults to the last grid value, which dominates every
    value actually used.
    """
    d = float(delta_grid[-1]) if delta_bar is None else float(delta_bar)
    k = _k(k)
    e, N, n = c.epsilon, c.fitted_norm, c.n
    return d * N * N / (2.0 * n * e * (k + 1.0)) + 2.0 * d * e / n


# ------------------------------------------------------------ sandwich


def sandwich(c, lk_sequence, lasso_losses):
    """Lower (Lasso value at l_k) and upper (geometric) envelopes of LS-Boost's training error."""
    lower = np.asarray(lasso_losses, dtype=float)
    k = np.arange(len(lower))
    upper = c.fitted_norm**2 * c.gamma**k / (2.0 * c.n) + c.loss_star
    return lower, upper


# ------------------------------------------------------------ profiles


@dataclass(frozen=True)
class GuaranteeProfile:
    variant: str
    constants: Constants
    ks: np.ndarray
    rows: dict = field(repr=False)

    def column(self, name):
        return self.rows[name]

    def as_records(self):
        names = list(self.rows)
        for i, k in enumerate(self.ks):
            yield {"iter": int(k), **{nm: float(self.rows[nm][i]) for nm in names}}


def build_profile(variant, c, ks, delta_grid=None):
    ks = np.asarray(ks, dtype=int)
    if variant == "lsboost":
        rows = lsboost_bounds(c, ks)
    elif variant == "fse":
        rows = fse_bounds(c, ks)
    elif variant == "rfs":
        rows = rfs_bounds(c, ks)
    elif variant == "path":
        rows = {"avg_gap_bound": path_bounds(c, delta_grid, ks)}
    else:
        raise ValueError(f"no a priori bounds for variant {variant!r}")
    rows = {k: np.broadcast_to(np.asarray(v, dtype=float), ks.shape).copy() for k, v in rows.items()}
    return GuaranteeProfile(variant, c, ks, rows)


def theoretical_pairs(c, ks, variant="lsboost"):
    """(training error bound, l1 shrinkage bound) pairs along the iteration axis."""
    ks = np.asarray(ks, dtype=float)
    if variant == "lsboost":
        return c.fitted_norm**2 * c.gamma**ks / (2.0 * c.n) + c.loss_star, lk_estimate(c, ks)
    if variant == "fse":
        s = ks * c.epsilon
        return c.loss_star + fse_tradeoff(c, s), s
    raise ValueError(f"no theoretical profile for variant {variant!r}")


# ------------------------------------------------------------ efficiency


@dataclass(frozen=True)
class EfficiencyReport:
    tau: float
    k_lsboost: int
    k_fse: int
    eta: float
    sbound_lsboost: float
    sbound_fse: float
    vartheta: float
    eta_continuous: float
    vartheta_continuous: float


def eta_continuous(tau):
    t2 = np.asarray(tau, dtype=float) ** 2
    return t2 * np.log(1.0 / t2)


def vartheta_continuous(tau):
    tau = np.asarray(tau, dtype=float)
    return tau * np.sqrt(np.log(1.0 / tau**2))


def efficiency(c, tau):
    """Iterations and shrinkage bounds each method needs for a tau-relative prediction error."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    scale = 4.0 * c.p / c.lambda_pmin
    k_ls = int(math.ceil(scale * math.log(1.0 / tau**2)))
    k_fs = int(math.ceil(scale / tau**2)) - 1
    N = c.fitted_norm
    s_ls = N * math.sqrt(k_ls)
    s_fs = N / math.sqrt(k_fs + 1.0) * k_fs
    return EfficiencyReport(
        tau=float(tau),
        k_lsboost=k_ls,
        k_fse=k_fs,
        eta=k_ls / k_fs,
        sbound_lsboost=s_ls,
        sbound_fse=s_fs,
        vartheta=s_ls / s_fs,
        eta_continuous=float(eta_continuous(tau)),
        vartheta_continuous=float(vartheta_continuous(tau)),
    )
