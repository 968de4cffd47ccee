"""Invariant families run by ``stagewise verify``.

Each family compares observed quantities from engine traces against
closed-form bounds or oracle values and reports its worst violation and
slack. A family passes iff no comparison is violated beyond tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import guarantees as G
from .boosters import AlgorithmConfig, expand_grid, geometric_grid, lsboost_schedule, run
from .data import SyntheticSpec, generate_synthetic, standardize
from .oracles import certify, delta_max, rcm_value, solve_lasso, solve_least_squares
from .spectral import analyze
from .subgrad import ResidualObjective, descend, lsboost_steps

RTOL = 1e-9
ATOL = 1e-12


class Tally:
    """Accumulates ``observed <= bound`` comparisons."""

    def __init__(self, rtol=RTOL, atol=ATOL):
        self.rtol, self.atol = rtol, atol
        self.count = 0
        self.max_violation = 0.0
        self.min_slack = math.inf
        self.max_slack = -math.inf
        self.failures = []

    def le(self, observed, bound, label=""):
        obs = np.atleast_1d(np.asarray(observed, dtype=float))
        bnd = np.broadcast_to(np.asarray(bound, dtype=float), obs.shape)
        slack = bnd - obs
        allowed = self.rtol * np.abs(bnd) + self.atol
        viol = np.max(-slack - allowed, initial=-math.inf)
        self.count += obs.size
        self.min_slack = min(self.min_slack, float(np.min(slack)))
        self.max_slack = max(self.max_slack, float(np.max(slack)))
        if viol > 0:
            self.max_violation = max(self.max_violation, float(np.max(-slack)))
            if len(self.failures) < 5:
                self.failures.append(label)

    def close(self, a, b, tol, label=""):
        diff = float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)),
                            initial=0.0))
        self.count += 1
        self.min_slack = min(self.min_slack, tol - diff)
        self.max_slack = max(self.max_slack, tol - diff)
        if diff > tol:
            self.max_violation = max(self.max_violation, diff)
            if len(self.failures) < 5:
                self.failures.append(label)

    def result(self, name):
        return FamilyResult(name, not self.failures, self.count, self.max_violation,
                            self.min_slack, self.max_slack, list(self.failures))


@dataclass
class FamilyResult:
    name: str
    passed: bool
    checks: int
    max_violation: float
    min_slack: float
    max_slack: float
    failures: list = field(default_factory=list)

    def as_dict(self):
        def num(v):
            return v if math.isfinite(v) else None

        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "max_violation": num(self.max_violation),
            "min_slack": num(self.min_slack),
            "max_slack": num(self.max_slack),
            "failures": self.failures,
        }


class Instance:
    """A standardized problem with lazily computed oracle quantities."""

    def __init__(self, problem, label=""):
        self.problem = problem
        self.label = label
        self._lasso = {}

    @classmethod
    def synthetic(cls, spec, center=True):
        draw = generate_synthetic(spec)
        return cls(standardize(draw.data, center=center), f"{spec}")

    @cached_property
    def summary(self):
        return analyze(self.problem)

    @cached_property
    def ls(self):
        return solve_least_squares(self.problem, self.summary)

    @cached_property
    def delta_max(self):
        return delta_max(self.problem, self.ls, self.summary)

    def constants(self, epsilon, delta=math.inf, gamma_offset=0.0):
        c = G.Constants.from_problem(self.problem, epsilon, delta, self.summary, self.ls)
        return G.Constants(c.n, c.p, c.lambda_pmin, c.fitted_norm, c.loss_star,
                           c.epsilon, c.delta, gamma_offset)

    def lasso(self, delta, tol=1e-8):
        key = (float(delta), tol)
        if key not in self._lasso:
            if delta >= self.delta_max:
                self._lasso[key] = self.ls.loss_star
            else:
                self._lasso[key] = solve_lasso(self.problem, delta, tol,
                                               summary=self.summary).loss_star_delta
        return self._lasso[key]


def default_instances(seed=0):
    out = []
    for i, (p, rho) in enumerate([(10, 0.0), (60, 0.5), (15, 0.9), (40, 0.0)]):
        out.append(Instance.synthetic(SyntheticSpec(30, p, rho, 1.0, 5, seed + i)))
    return out


# ---------------------------------------------------------------- families


def check_cross_consistency(instances, iters=200):
    t = Tally()
    for inst in instances:
        P = inst.problem
        ls_trace = run(P, AlgorithmConfig("lsboost", 0.5, iters))
        cfgs = [
            AlgorithmConfig("lsboost", 0.5, iters),
            AlgorithmConfig("fse", 0.05, iters),
            AlgorithmConfig("fsek", 0.5, iters, epsilon_schedule=lsboost_schedule(ls_trace)),
            AlgorithmConfig("rfs", 0.05, iters, delta=0.5 * inst.delta_max),
            AlgorithmConfig("path", 0.05, iters,
                            delta_grid=expand_grid(geometric_grid(0.1, 1.0, 5), iters)),
        ]
        for cfg in cfgs:
            tr = run(P, cfg)
            drift = np.max(np.abs(P.y - tr.betas @ P.X.T - tr.resids))
            t.close(drift, 0.0, 1e-10, f"{inst.label} {cfg.variant.value}")
            t.le(tr.l0_norm, np.arange(tr.n_iters + 1), f"l0 {cfg.variant.value}")
    return t.result("cross_consistency")


def check_lsboost(instances, epsilons=(0.01, 0.1, 1.0), iters=300, gamma_offset=0.0):
    contraction = Tally(rtol=0.0, atol=1e-12)
    bounds = Tally()
    for inst in instances:
        P = inst.problem
        for eps in epsilons:
            c = inst.constants(eps, gamma_offset=gamma_offset)
            tr = run(P, AlgorithmConfig("lsboost", eps, iters))
            gap = tr.train_error - c.loss_star
            contraction.le(gap[1:], c.gamma * gap[:-1], f"contraction eps={eps}")
            ks = np.arange(tr.n_iters + 1)
            b = G.lsboost_bounds(c, ks)
            pred = np.linalg.norm(tr.resids - (P.y - inst.ls.fitted), axis=1)
            coef = np.linalg.norm((tr.betas - inst.ls.beta_ls) @ inst.ls.row_basis, axis=1)
            bounds.le(gap, b["train_error_bound"], f"(i) eps={eps}")
            bounds.le(coef, b["coeff_dist_bound"], f"(ii) eps={eps}")
            bounds.le(pred, b["prediction_dist_bound"], f"(iii) eps={eps}")
            bounds.le(tr.inf_corr / P.n, b["gradient_bound"], f"(iv) eps={eps}")
            bounds.le(tr.l1_norm, G.lsboost_l1_bound(c, ks, pred), f"(v) eps={eps}")
            bounds.le(tr.l0_norm, ks, f"(vi) eps={eps}")
    return contraction.result("lsboost_contraction"), bounds.result("lsboost_bounds")


def check_fse(instances, epsilons=(0.01, 0.1), iters=400):
    t = Tally()
    for inst in instances:
        P = inst.problem
        for eps in epsilons:
            c = inst.constants(eps)
            tr = run(P, AlgorithmConfig("fse", eps, iters))
            ks = np.arange(tr.n_iters + 1)
            b = G.fse_bounds(c, ks)
            best = np.minimum.accumulate(tr.inf_corr)
            arg = np.array([int(np.argmin(tr.inf_corr[: k + 1])) for k in ks])
            gap = tr.train_error - c.loss_star
            pred = np.linalg.norm(tr.resids - (P.y - inst.ls.fitted), axis=1)
            coef = np.linalg.norm((tr.betas - inst.ls.beta_ls) @ inst.ls.row_basis, axis=1)
            t.le(best, b["inf_corr_bound"], f"(iv) eps={eps}")
            t.le(gap[arg], b["train_error_bound"], f"(i) eps={eps}")
            t.le(coef[arg], b["coeff_dist_bound"], f"(ii) eps={eps}")
            t.le(pred[arg], b["prediction_dist_bound"], f"(iii) eps={eps}")
            t.le(tr.l1_norm, b["l1_shrink_bound"], f"(v) eps={eps}")
            t.le(tr.l0_norm, ks, f"(vi) eps={eps}")
    return t.result("fse_bounds")


def check_rfs(instances, cells=((0.01, 0.3), (0.05, 0.6), (0.1, 0.9)), iters=400):
    t = Tally()
    for inst in instances:
        P = inst.problem
        for eps, frac in cells:
            delta = frac * inst.delta_max
            if eps > delta:
                continue
            c = inst.constants(eps, delta)
            tr = run(P, AlgorithmConfig("rfs", eps, iters, delta=delta))
            ks = np.arange(tr.n_iters + 1)
            b = G.rfs_bounds(c, ks)
            lstar = inst.lasso(delta)
            t.le(tr.l1_norm, b["l1_shrink_bound"], f"(iii) eps={eps} frac={frac}")
            t.le(np.minimum.accumulate(tr.train_error - lstar), b["train_gap_bound"],
                 f"(i) eps={eps} frac={frac}")
            omegas = np.array([certify(P, tr.betas[k], delta).omega for k in ks])
            t.le(np.cumsum(omegas) / (ks + 1), b["omega_bound"], f"avg omega eps={eps}")
    return t.result("rfs_bounds")


def check_path(instances, eps=1e-3, iters=1000, points=10):
    t = Tally(rtol=0.0, atol=1e-8)
    for inst in instances:
        P = inst.problem
        grid = geometric_grid(0.05 * inst.delta_max, inst.delta_max, points)
        seq = expand_grid(grid, iters)
        tr = run(P, AlgorithmConfig("path", eps, iters, delta_grid=seq))
        c = inst.constants(eps)
        used = np.array([seq[0]] + [seq[min(k, len(seq) - 1)] for k in range(iters)])
        lstar = np.array([inst.lasso(d) for d in used])
        ks = np.arange(tr.n_iters + 1)
        avg = np.cumsum(tr.train_error - lstar) / (ks + 1)
        t.le(avg, G.path_bounds(c, seq, ks), "average suboptimality")
        t.le(tr.l1_norm[1:], used[1:] * (1 + 1e-12), "feasibility")
    return t.result("path_bounds")


def check_equivalences(instances, iters=200):
    t = Tally()
    for inst in instances:
        P = inst.problem
        pairs = []
        tr = run(P, AlgorithmConfig("fse", 0.05, iters))
        pairs.append((tr, descend(ResidualObjective.cm(P), 0.05, iters), "fse~cm"))
        tr = run(P, AlgorithmConfig("lsboost", 0.3, iters))
        pairs.append((tr, descend(ResidualObjective.cm(P), lsboost_steps(0.3), iters),
                      "lsboost~cm"))
        delta = 0.5 * inst.delta_max
        tr = run(P, AlgorithmConfig("rfs", 0.05, iters, delta=delta))
        pairs.append((tr, descend(ResidualObjective.rcm(P, delta), 0.05, iters), "rfs~rcm"))
        for tr, states, label in pairs:
            R = np.array([s.r for s in states])
            B = np.array([s.beta_shadow for s in states])
            t.close(tr.resids, R, 1e-12, label + " resid")
            t.close(tr.betas, B, 1e-12, label + " beta")
    return t.result("subgradient_equivalence")


def check_duality(instances, fracs=(0.1, 0.3, 0.5, 0.7, 0.9), seed=0):
    t = Tally(rtol=0.0, atol=1e-6)
    rng = np.random.default_rng(seed)
    for inst in instances:
        P = inst.problem
        null = P.null_loss
        for frac in fracs:
            delta = frac * inst.delta_max
            sol = solve_lasso(P, delta, 1e-8, summary=inst.summary)
            r = P.y - P.X @ sol.beta_star
            resid = sol.loss_star_delta + delta / P.n * rcm_value(P, r, delta) - null
            t.close(resid, 0.0, 1e-6, f"strong duality frac={frac}")
            for _ in range(5):
                b = rng.standard_normal(P.p)
                b *= delta * rng.uniform() / np.abs(b).sum()
                cert = certify(P, b, delta)
                t.le(cert.primal_value - sol.loss_star_delta, cert.gap_bound + 1e-9, "gap bound")
                r_t = P.y - P.X @ rng.standard_normal(P.p)
                t.le(null, P.loss(b) + delta / P.n * rcm_value(P, r_t, delta) + 1e-10,
                     "weak duality")
    return t.result("duality")


def check_efficiency(taus=None):
    t = Tally(rtol=0.0, atol=0.0)
    taus = np.linspace(0.01, 1.0, 100) if taus is None else taus
    t.le(G.eta_continuous(taus), 0.368, "eta")
    t.le(G.vartheta_continuous(taus), 0.607, "vartheta")
    return t.result("efficiency")


def run_suite(seed=0, gamma_offset=0.0):
    instances = default_instances(seed)
    results = [check_cross_consistency(instances)]
    results.extend(check_lsboost(instances, gamma_offset=gamma_offset))
    results.append(check_fse(instances))
    results.append(check_rfs(instances))
    results.append(check_path(instances[:2]))
    results.append(check_equivalences(instances))
    results.append(check_duality(instances[:2]))
    results.append(check_efficiency())
    return results
