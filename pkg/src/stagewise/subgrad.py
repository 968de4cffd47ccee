"""Subgradient descent over the residual set {y - X beta}.

Two objectives are supported: correlation minimization ``cm``,
f(r) = ||X'r||_inf, and its regularized form ``rcm``,
f(r) = ||X'r||_inf + ||r - y||^2 / (2 delta). Iterates stay in the residual
set by construction, so no projection is ever computed; a shadow
coefficient vector certifies membership.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import StandardizedProblem
from .errors import ConfigError

MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True)
class ResidualObjective:
    kind: str
    problem: StandardizedProblem = field(repr=False)
    delta: float = math.inf

    def __post_init__(self):
        if self.kind not in ("cm", "rcm"):
            raise ConfigError(f"unknown objective kind {self.kind!r}")
        if self.kind == "rcm" and not self.delta > 0:
            raise ConfigError("rcm objective needs delta > 0")

    @classmethod
    def cm(cls, problem):
        return cls("cm", problem)

    @classmethod
    def rcm(cls, problem, delta):
        return cls("rcm", problem, float(delta))

    @property
    def regularized(self):
        return self.kind == "rcm" and math.isfinite(self.delta)


@dataclass(frozen=True)
class SubgradState:
    r: np.ndarray
    beta_shadow: np.ndarray
    k: int
    grad: np.ndarray = field(default=None, repr=False)
    value: float = math.nan


def evaluate(obj, r):
    X, y = obj.problem.X, obj.problem.y
    val = float(np.max(np.abs(X.T @ r)))
    if obj.regularized:
        d = r - y
        val += float(d @ d) / (2.0 * obj.delta)
    return val


def _direction(obj, r):
    X = obj.problem.X
    corr = X.T @ r
    j = int(np.argmax(np.abs(corr)))
    c = float(corr[j])
    s = 1.0 if c > 0 else (-1.0 if c < 0 else 0.0)
    g = s * X[:, j]
    if obj.regularized:
        g = g + (r - obj.problem.y) / obj.delta
    return g, j, s, c


def subgradient(obj, r):
    """A subgradient of the objective at ``r`` (smallest-index tie-break)."""
    return _direction(obj, np.asarray(r, dtype=float))[0]


def lsboost_steps(epsilon):
    """Step rule alpha_k = eps * |max correlation| at the current residual."""

    def rule(k, r, corr):
        return epsilon * abs(corr)

    return rule


def _step_rule(step_sizes):
    if callable(step_sizes):
        return step_sizes
    if np.isscalar(step_sizes):
        alpha = float(step_sizes)
        return lambda k, r, corr: alpha
    seq = [float(a) for a in step_sizes]
    return lambda k, r, corr: seq[k]


def descend(obj, step_sizes, iters, validate=True):
    """Run ``iters`` subgradient steps from r = y.

    ``step_sizes`` is a constant, a sequence, or a callable
    ``(k, r, corr) -> alpha`` where ``corr`` is the selected signed
    correlation. Returns the list of states k = 0..iters.
    """
    problem = obj.problem
    X, y = problem.X, problem.y
    rule = _step_rule(step_sizes)
    r = np.array(y, dtype=float)
    beta = np.zeros(problem.p)
    states = []
    for k in range(iters + 1):
        g, j, s, c = _direction(obj, r)
        states.append(SubgradState(r, beta, k, g, evaluate(obj, r)))
        if validate:
            drift = np.max(np.abs(y - X @ beta - r))
            scale = max(1.0, float(np.max(np.abs(y))))
            assert drift <= MEMBERSHIP_TOL * scale, f"left the residual set at k={k}: {drift}"
        if k == iters:
            break
        alpha = rule(k, r, c)
        if not alpha >= 0:
            raise ConfigError(f"step size must be nonnegative, got {alpha} at k={k}")
        r = r - alpha * g
        if obj.regularized:
            beta = (1.0 - alpha / obj.delta) * beta
        else:
            beta = beta.copy()
        beta[j] += alpha * s
    return states


def sd_bound(dist0, G, alpha, k):
    """Guarantee dist0^2 / (2(k+1) alpha) + alpha G^2 / 2 on min_i f(x^i) - f*."""
    return dist0 * dist0 / (2.0 * (k + 1) * alpha) + alpha * G * G / 2.0


def elementary_sequence_check(points, grads, x, alpha, G):
    """Both sides of the averaged inequality for x^{i+1} = x^i - alpha g^i.

    Returns ``(lhs, rhs)`` with lhs = mean_i g^i'(x^i - x) and
    rhs = ||x^0 - x||^2 / (2(k+1) alpha) + G^2 alpha / 2.
    """
    points = np.asarray(points)
    grads = np.asarray(grads)
    k1 = len(points)
    lhs = float(np.mean(np.einsum("ij,ij->i", grads, points - x)))
    d0 = points[0] - x
    rhs = float(d0 @ d0) / (2.0 * k1 * alpha) + G * G * alpha / 2.0
    return lhs, rhs
