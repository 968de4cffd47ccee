"""Steppable engines for LS-Boost, FS_eps, FS_eps_k, R-FS and its path variant.

Every engine starts at beta = 0, r = y and updates the residual
incrementally; the coefficient vector is updated separately so the two can
be cross-checked.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .data import StandardizedProblem
from .errors import ConfigError, EpsilonOutOfRangeError, GridTooShortError

L0_THRESHOLD = 1e-5


class Variant(str, enum.Enum):
    LSBOOST = "lsboost"
    FSE = "fse"
    FSEK = "fsek"
    RFS = "rfs"
    PATH = "path"


def sgn(x):
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def select_column(resid, X):
    """Column with the largest absolute correlation; ties go to the smallest index.

    Returns ``(index, signed correlation)``.
    """
    corr = X.T @ resid
    j = int(np.argmax(np.abs(corr)))
    return j, float(corr[j])


@dataclass(frozen=True)
class AlgorithmConfig:
    variant: Variant
    epsilon: float = 0.01
    max_iters: int = 100
    epsilon_schedule: tuple = None
    delta: float = math.inf
    delta_grid: tuple = None
    stop_tolerance: float = 0.0
    grid_extension: str = "clamp"

    def __post_init__(self):
        v = Variant(self.variant)
        object.__setattr__(self, "variant", v)
        if self.max_iters < 0:
            raise ConfigError("max_iters must be nonnegative")
        if self.stop_tolerance < 0:
            raise ConfigError("stop_tolerance must be nonnegative")
        if v is Variant.LSBOOST and not 0.0 < self.epsilon <= 1.0:
            raise EpsilonOutOfRangeError(f"LS-Boost needs 0 < eps <= 1, got {self.epsilon}")
        if v in (Variant.FSE, Variant.RFS, Variant.PATH) and not self.epsilon > 0:
            raise EpsilonOutOfRangeError(f"learning rate must be positive, got {self.epsilon}")
        if v is Variant.FSEK:
            if self.epsilon_schedule is None:
                raise ConfigError("FSek needs an epsilon_schedule")
            sched = tuple(float(e) for e in self.epsilon_schedule)
            if any(not (e >= 0 and math.isfinite(e)) for e in sched):
                raise EpsilonOutOfRangeError("schedule entries must be finite and >= 0")
            if len(sched) < self.max_iters:
                raise ConfigError(
                    f"schedule has {len(sched)} entries but max_iters={self.max_iters}"
                )
            object.__setattr__(self, "epsilon_schedule", sched)
        if v is Variant.RFS:
            if not self.delta > 0:
                raise ConfigError(f"delta must be positive, got {self.delta}")
            if self.epsilon > self.delta:
                raise EpsilonOutOfRangeError(
                    f"R-FS needs eps <= delta, got eps={self.epsilon}, delta={self.delta}"
                )
        if v is Variant.PATH:
            if not self.delta_grid:
                raise ConfigError("path variant needs a nonempty delta_grid")
            grid = tuple(float(d) for d in self.delta_grid)
            if any(b < a for a, b in zip(grid, grid[1:])):
                raise ConfigError("delta_grid must be nondecreasing")
            if self.epsilon > grid[0]:
                raise EpsilonOutOfRangeError(
                    f"path variant needs eps <= delta_grid[0], got {self.epsilon} > {grid[0]}"
                )
            if self.grid_extension not in ("clamp", "error"):
                raise ConfigError("grid_extension must be 'clamp' or 'error'")
            if self.grid_extension == "error" and len(grid) < self.max_iters:
                raise GridTooShortError(
                    f"grid has {len(grid)} values but max_iters={self.max_iters}"
                )
            object.__setattr__(self, "delta_grid", grid)

    def delta_at(self, k):
        """Regularization parameter used by iteration k (path variant clamps)."""
        if self.variant is Variant.PATH:
            return self.delta_grid[min(k, len(self.delta_grid) - 1)]
        if self.variant is Variant.RFS:
            return self.delta
        return math.inf


@dataclass(frozen=True)
class BoostState:
    """Iterate after ``k`` steps plus the move that produced it."""

    beta: np.ndarray
    resid: np.ndarray
    k: int = 0
    j: int = -1
    corr: float = 0.0
    sign: float = 0.0
    step: float = 0.0
    delta: float = math.inf

    @classmethod
    def initial(cls, problem):
        return cls(np.zeros(problem.p), np.array(problem.y, dtype=float))


def _advance(state, beta, resid, j, corr, s, step, delta=math.inf):
    return BoostState(beta, resid, state.k + 1, j, corr, s, step, delta)


def step_lsboost(problem, state, epsilon):
    if not 0.0 < epsilon <= 1.0:
        raise EpsilonOutOfRangeError(f"LS-Boost needs 0 < eps <= 1, got {epsilon}")
    X = problem.X
    j, u = select_column(state.resid, X)
    inc = epsilon * u
    beta = state.beta.copy()
    beta[j] += inc
    resid = state.resid - inc * X[:, j]
    return _advance(state, beta, resid, j, u, sgn(u), inc)


def step_fsek(problem, state, epsilon_k):
    if not epsilon_k >= 0:
        raise EpsilonOutOfRangeError(f"step must be nonnegative, got {epsilon_k}")
    X = problem.X
    j, u = select_column(state.resid, X)
    s = sgn(u)
    inc = epsilon_k * s
    beta = state.beta.copy()
    beta[j] += inc
    resid = state.resid - inc * X[:, j]
    return _advance(state, beta, resid, j, u, s, inc)


def step_fse(problem, state, epsilon):
    if not epsilon > 0:
        raise EpsilonOutOfRangeError(f"learning rate must be positive, got {epsilon}")
    return step_fsek(problem, state, epsilon)


def step_rfs(problem, state, epsilon, delta):
    """One regularized stagewise step: shrink all coefficients, then nudge one."""
    if not 0.0 < epsilon <= delta:
        raise EpsilonOutOfRangeError(f"need 0 < eps <= delta, got eps={epsilon}, delta={delta}")
    if math.isinf(delta):
        nxt = step_fse(problem, state, epsilon)
        return BoostState(nxt.beta, nxt.resid, nxt.k, nxt.j, nxt.corr, nxt.sign, nxt.step, delta)
    X, y = problem.X, problem.y
    j, u = select_column(state.resid, X)
    s = sgn(u)
    shrink = 1.0 - epsilon / delta
    beta = shrink * state.beta
    beta[j] += epsilon * s
    resid = state.resid - epsilon * (s * X[:, j] + (state.resid - y) / delta)
    return _advance(state, beta, resid, j, u, s, beta[j] - state.beta[j], delta)


@dataclass(frozen=True)
class BoostTrace:
    """Per-iteration record of a run, k = 0..K.

    Row k describes the iterate after k steps; ``j[k]``, ``sign[k]``,
    ``step[k]`` and ``corr[k]`` describe the move that produced it (row 0
    holds the initial state with j = -1). ``delta[k]`` is the
    regularization parameter used by that move; row 0 repeats the value the
    first move will use, and unregularized variants record inf.
    """

    variant: Variant
    config: AlgorithmConfig
    j: np.ndarray
    sign: np.ndarray
    step: np.ndarray
    corr: np.ndarray
    delta: np.ndarray
    train_error: np.ndarray
    l1_norm: np.ndarray
    l0_norm: np.ndarray
    inf_corr: np.ndarray
    betas: np.ndarray = field(default=None, repr=False)
    resids: np.ndarray = field(default=None, repr=False)
    final_beta: np.ndarray = field(default=None, repr=False)
    final_resid: np.ndarray = field(default=None, repr=False)
    stop_reason: str = "max_iters"

    @property
    def n_iters(self):
        return len(self.train_error) - 1

    @property
    def converged(self):
        return self.stop_reason != "max_iters"

    def beta(self, k):
        if self.betas is None:
            raise ValueError("trace was recorded in statistics-only mode")
        return self.betas[k]

    def resid(self, k):
        if self.resids is None:
            raise ValueError("trace was recorded in statistics-only mode")
        return self.resids[k]


def _step_for(problem, config, state):
    v = config.variant
    k = state.k
    if v is Variant.LSBOOST:
        return step_lsboost(problem, state, config.epsilon)
    if v is Variant.FSE:
        return step_fse(problem, state, config.epsilon)
    if v is Variant.FSEK:
        return step_fsek(problem, state, config.epsilon_schedule[k])
    return step_rfs(problem, state, config.epsilon, config.delta_at(k))


def run(problem, config, store_vectors=True):
    """Run ``config.max_iters`` steps, or fewer if the stopping rule fires.

    Unregularized variants stop once ||X'r||_inf <= stop_tolerance (with the
    default tolerance 0 this only fires at an exact fixed point). The
    regularized variants shrink even when the correlations vanish, so they
    only stop early for a strictly positive tolerance.
    """
    if not isinstance(problem, StandardizedProblem):
        raise TypeError("engines require a StandardizedProblem; call standardize() first")
    n = problem.n
    X = problem.X
    regularized = config.variant in (Variant.RFS, Variant.PATH)
    init = BoostState.initial(problem)
    state = BoostState(init.beta, init.resid, delta=config.delta_at(0))
    states = [state]
    stats = [_stats(X, state, n)]
    reason = "max_iters"
    for _ in range(config.max_iters):
        inf_corr = stats[-1][3]
        if inf_corr <= config.stop_tolerance and (not regularized or config.stop_tolerance > 0):
            reason = "tolerance" if inf_corr > 0 else "fixed_point"
            break
        state = _step_for(problem, config, state)
        if store_vectors:
            states.append(state)
        else:
            states = [state]
        stats.append(_stats(X, state, n))
    return _assemble(config, states, stats, state, store_vectors, reason)


def run_path(problem, config, store_vectors=True):
    if config.variant is not Variant.PATH:
        raise ConfigError("run_path expects a config with variant 'path'")
    return run(problem, config, store_vectors)


def _stats(X, state, n):
    r = state.resid
    train = float(r @ r) / (2 * n)
    l1 = float(np.sum(np.abs(state.beta)))
    l0 = int(np.count_nonzero(np.abs(state.beta) > L0_THRESHOLD))
    inf_corr = float(np.max(np.abs(X.T @ r)))
    return train, l1, l0, inf_corr, state.j, state.sign, state.step, state.corr, state.delta


def _assemble(config, states, stats, last, store_vectors, reason):
    cols = list(zip(*stats))
    betas = resids = None
    if store_vectors:
        betas = np.array([s.beta for s in states])
        resids = np.array([s.resid for s in states])
        betas.setflags(write=False)
        resids.setflags(write=False)

    def arr(values, dtype=float):
        a = np.array(values, dtype=dtype)
        a.setflags(write=False)
        return a

    return BoostTrace(
        variant=config.variant,
        config=config,
        train_error=arr(cols[0]),
        l1_norm=arr(cols[1]),
        l0_norm=arr(cols[2], int),
        inf_corr=arr(cols[3]),
        j=arr(cols[4], int),
        sign=arr(cols[5]),
        step=arr(cols[6]),
        corr=arr(cols[7]),
        delta=arr(cols[8]),
        betas=betas,
        resids=resids,
        final_beta=last.beta,
        final_resid=last.resid,
        stop_reason=reason,
    )


def lsboost_schedule(trace):
    """Per-iteration rates eps*|u_k| that make FS_eps_k replay an LS-Boost trace."""
    return tuple(float(abs(s)) for s in trace.step[1:])


def expand_grid(values, iterations):
    """Hold each value of a short grid for an equal share of ``iterations`` steps."""
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("empty grid")
    reps = max(1, -(-iterations // len(values)))
    out = [v for v in values for _ in range(reps)]
    return tuple(out[: max(iterations, 1)])


def geometric_grid(lo, hi, count):
    if count < 1 or not 0 < lo <= hi:
        raise ConfigError("need count >= 1 and 0 < lo <= hi")
    if count == 1:
        return (float(hi),)
    return tuple(float(v) for v in np.geomspace(lo, hi, count))
