"""Ground-truth solvers and certificates, independent of the boosting code."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .data import StandardizedProblem
from .errors import (
    ConfigError,
    InfeasibleBetaError,
    MaxItersExceededError,
    UnboundedBelowError,
)
from .spectral import analyze

FEASIBILITY_SLACK = 1e-10


# ------------------------------------------------------------ least squares


@dataclass(frozen=True)
class LeastSquaresSolution:
    beta_ls: np.ndarray
    fitted: np.ndarray
    loss_star: float
    fitted_norm: float
    row_basis: np.ndarray = field(repr=False, default=None)

    def distance_to_solution_set(self, beta):
        """l2 distance from ``beta`` to the affine set of least squares solutions."""
        return float(np.linalg.norm(self.row_basis.T @ (np.asarray(beta) - self.beta_ls)))

    def prediction_distance(self, X, beta):
        return float(np.linalg.norm(X @ beta - self.fitted))


def _pinv_apply(X, summary, v):
    """Minimum-norm solution of X b = v in the least squares sense."""
    keep = summary.nonzero()
    lam = summary.eigvals[keep]
    vecs = summary.eigvecs[:, keep]
    if summary.side == "p":
        return vecs @ ((vecs.T @ (X.T @ v)) / lam)
    return X.T @ (vecs @ ((vecs.T @ v) / lam))


def solve_least_squares(problem, summary=None):
    """Minimum l2-norm least squares fit through the spectral pseudoinverse."""
    summary = summary or analyze(problem)
    X, y = problem.X, problem.y
    beta = _pinv_apply(X, summary, y)
    # one round of iterative refinement tightens the normal equations
    beta = beta + _pinv_apply(X, summary, y - X @ beta)
    keep = summary.nonzero()
    vecs = summary.eigvecs[:, keep]
    if summary.side == "p":
        basis = vecs
    else:
        basis = (X.T @ vecs) / np.sqrt(summary.eigvals[keep])
    fitted = X @ beta
    r = y - fitted
    for a in (beta, fitted, basis):
        a.setflags(write=False)
    return LeastSquaresSolution(
        beta_ls=beta,
        fitted=fitted,
        loss_star=float(r @ r) / (2 * problem.n),
        fitted_norm=float(np.linalg.norm(fitted)),
        row_basis=basis,
    )


# ------------------------------------------------------------ duality


@dataclass(frozen=True)
class DualCertificate:
    """Optimality certificate for the l1-constrained least squares problem."""

    delta: float
    omega: float
    gap_bound: float
    primal_value: float
    dual_value: float
    null_value: float
    n: int

    @property
    def strong_duality_residual(self):
        """primal + (delta/n) dual - ||y||^2/(2n); equals (delta/n) omega."""
        return self.primal_value + self.delta / self.n * self.dual_value - self.null_value


def certify(problem, beta, delta):
    """Duality-gap certificate omega = ||X'r||_inf - r'X beta / delta for feasible beta."""
    beta = np.asarray(beta, dtype=float)
    if not (delta > 0 and math.isfinite(delta)):
        raise ConfigError(f"delta must be positive and finite, got {delta}")
    l1 = float(np.sum(np.abs(beta)))
    if l1 > delta * (1.0 + FEASIBILITY_SLACK):
        raise InfeasibleBetaError(f"||beta||_1 = {l1!r} exceeds delta = {delta!r}")
    X, y = problem.X, problem.y
    n = problem.n
    fit = X @ beta
    r = y - fit
    corr = X.T @ r
    top = float(np.max(np.abs(corr)))
    omega = top - float(r @ fit) / delta
    return DualCertificate(
        delta=float(delta),
        omega=omega,
        gap_bound=delta / n * omega,
        primal_value=float(r @ r) / (2 * n),
        dual_value=top + float(fit @ fit) / (2 * delta),
        null_value=float(y @ y) / (2 * n),
        n=n,
    )


def rcm_value(problem, r, delta):
    """f_delta(r) = ||X'r||_inf + ||r - y||^2 / (2 delta)."""
    d = r - problem.y
    return float(np.max(np.abs(problem.X.T @ r))) + float(d @ d) / (2 * delta)


# ------------------------------------------------------------ lasso


def project_l1_ball(v, radius):
    """Euclidean projection onto {b : ||b||_1 <= radius} by sort and threshold."""
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, u.size + 1)
    rho = np.flatnonzero(u - css / idx > 0)[-1]
    theta = css[rho] / (rho + 1.0)
    w = np.sign(v) * np.maximum(a - theta, 0.0)
    # theta can lose digits to cancellation when radius << ||v||_1
    total = np.abs(w).sum()
    if total > radius:
        w *= radius / total
    return w


@dataclass(frozen=True)
class LassoSolution:
    delta: float
    beta_star: np.ndarray
    loss_star_delta: float
    certificate: DualCertificate
    iterations: int = 0


def _lasso_result(problem, beta, delta, iters):
    beta = np.array(beta, dtype=float)
    l1 = np.sum(np.abs(beta))
    if l1 > delta:
        beta *= delta / l1
    cert = certify(problem, beta, delta)
    beta.setflags(write=False)
    return LassoSolution(float(delta), beta, cert.primal_value, cert, iters)


def _polish(problem, beta, delta):
    """Exact solve on the current support and sign pattern; None if it does not help."""
    X, y = problem.X, problem.y
    mag = np.abs(beta)
    if not mag.any():
        return None
    support = np.flatnonzero(mag > 1e-12 * mag.max())
    s = np.sign(beta[support])
    XS = X[:, support]
    cands = []
    b_free = np.linalg.lstsq(XS, y, rcond=None)[0]
    cands.append(b_free)
    m = support.size
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = XS.T @ XS
    kkt[:m, m] = s
    kkt[m, :m] = s
    rhs = np.concatenate([XS.T @ y, [delta]])
    cands.append(np.linalg.lstsq(kkt, rhs, rcond=None)[0][:m])
    best = None
    for b in cands:
        if not np.all(np.isfinite(b)):
            continue
        full = np.zeros(problem.p)
        full[support] = b
        l1 = np.sum(np.abs(full))
        if l1 > delta * (1.0 + 1e-9):
            continue
        if l1 > delta:
            full *= delta / l1
        omega = certify(problem, full, delta).omega
        if best is None or omega < best[0]:
            best = (omega, full)
    return best


def solve_lasso(problem, delta, tol=1e-8, max_iter=200_000, beta0=None, summary=None,
                polish_every=50):
    """Minimize ||y - X b||^2/(2n) subject to ||b||_1 <= delta.

    Accelerated projected gradient (step n / lambda_max, adaptive restart)
    with periodic exact re-solves on the identified support. Stops once the
    duality certificate omega drops to ``tol``.
    """
    if not (delta > 0 and math.isfinite(delta)):
        raise ConfigError(f"delta must be positive and finite, got {delta}")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    summary = summary or analyze(problem)
    X, y = problem.X, problem.y
    n = problem.n
    step = n / summary.lambda_max
    x = project_l1_ball(np.zeros(problem.p) if beta0 is None else beta0, delta)
    z = x.copy()
    t = 1.0
    best_beta, best_omega = x, certify(problem, x, delta).omega
    for it in range(1, max_iter + 1):
        grad = -(X.T @ (y - X @ z)) / n
        x_new = project_l1_ball(z - step * grad, delta)
        if (z - x_new) @ (x_new - x) > 0:
            t = 1.0
            z = x_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            z = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
        if it % 10 == 0 or it == max_iter:
            omega = certify(problem, x, delta).omega
            if omega < best_omega:
                best_beta, best_omega = x, omega
            if best_omega <= tol:
                return _lasso_result(problem, best_beta, delta, it)
        if it % polish_every == 0:
            polished = _polish(problem, x, delta)
            if polished is not None and polished[0] < best_omega:
                best_omega, best_beta = polished
                if best_omega <= tol:
                    return _lasso_result(problem, best_beta, delta, it)
                x = best_beta.copy()
                z = x.copy()
                t = 1.0
    best = _lasso_result(problem, best_beta, delta, max_iter)
    raise MaxItersExceededError(
        f"lasso solver reached {max_iter} iterations with omega={best_omega!r} > tol={tol!r}",
        best=best,
    )


# ------------------------------------------------------------ delta_max


@dataclass(frozen=True)
class MinL1Solution:
    value: float
    beta: np.ndarray
    exact: bool
    constraint_residual: float


def min_l1_least_squares(problem, ls=None, summary=None):
    """Smallest l1-norm point of the least squares solution set.

    Full column rank: the unique solution. Otherwise a linear program over
    the row-space coordinates, beta = u - v with u, v >= 0.
    """
    summary = summary or analyze(problem)
    ls = ls or solve_least_squares(problem, summary)
    p = problem.p
    if summary.rank == p:
        beta = np.array(ls.beta_ls)
        return MinL1Solution(float(np.sum(np.abs(beta))), beta, True, 0.0)
    B = ls.row_basis
    A_eq = np.hstack([B.T, -B.T])
    b_eq = B.T @ ls.beta_ls
    res = linprog(
        np.ones(2 * p), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise MaxItersExceededError(f"min-l1 linear program failed: {res.message}")
    beta = res.x[:p] - res.x[p:]
    resid = float(np.max(np.abs(problem.X @ beta - ls.fitted)))
    return MinL1Solution(float(np.sum(np.abs(beta))), beta, False, resid)


def delta_max(problem, ls=None, summary=None):
    """l1 norm of the minimum-l1 least squares solution."""
    return min_l1_least_squares(problem, ls, summary).value


# ------------------------------------------------------------ identities


def representation_value(problem, beta, r_tilde):
    """-r'X beta/n - ||r - y||^2/(2n) + ||y||^2/(2n); maximized at r = y - X beta."""
    X, y = problem.X, problem.y
    n = problem.n
    d = r_tilde - y
    return float(-(r_tilde @ (X @ beta)) / n - (d @ d) / (2 * n) + (y @ y) / (2 * n))


def max_representation_check(problem, beta):
    """|L_n(beta) - representation at its maximizer|; expected at rounding level."""
    beta = np.asarray(beta, dtype=float)
    r_bar = problem.y - problem.X @ beta
    return abs(representation_value(problem, beta, r_bar) - problem.loss(beta))


@dataclass(frozen=True)
class QuadraticLemmaResult:
    distance_ok: bool
    gradient_ok: bool
    distance: float
    distance_bound: float
    grad_norm: float
    grad_bound: float
    gap: float

    def __iter__(self):
        return iter((self.distance_ok, self.gradient_ok))


def quadratic_lemma_check(Q, q, x, rtol=1e-10):
    """Check the distance and gradient bounds for h(x) = x'Qx/2 + q'x against the exact optimum."""
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.allclose(Q, Q.T, atol=1e-12 * max(1.0, np.abs(Q).max())):
        raise ConfigError("Q must be symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (Q + Q.T))
    top = max(float(vals[-1]), 0.0)
    thr = Q.shape[0] * np.finfo(float).eps * top
    if vals[0] < -max(thr, 1e-12):
        raise ConfigError("Q must be positive semidefinite")
    keep = vals > thr
    if not keep.any():
        if np.linalg.norm(q) > 0:
            raise UnboundedBelowError("linear term with zero quadratic part")
        raise ConfigError("Q has no nonzero eigenvalue")
    P = vecs[:, keep]
    D = vals[keep]
    q_perp = q - P @ (P.T @ q)
    if np.linalg.norm(q_perp) > 1e-10 * max(1.0, np.linalg.norm(q)):
        raise UnboundedBelowError("q has a component in the null space of Q")
    lam = float(D[0])
    x_star = (x - P @ (P.T @ x)) - P @ ((P.T @ q) / D)

    def h(v):
        return 0.5 * v @ Q @ v + q @ v

    gap = max(h(x) - h(x_star), 0.0)
    dist = float(np.linalg.norm(x - x_star))
    dist_bound = math.sqrt(2.0 * gap / lam)
    grad = float(np.linalg.norm(Q @ x + q))
    grad_bound = math.sqrt(lam * gap / 2.0)
    slack = rtol * max(1.0, dist_bound, grad) + 1e-15
    return QuadraticLemmaResult(
        distance_ok=dist <= dist_bound + slack,
        gradient_ok=grad + slack >= grad_bound,
        distance=dist,
        distance_bound=dist_bound,
        grad_norm=grad,
        grad_bound=grad_bound,
        gap=gap,
    )
