"""Command-line harness: gen, fit, profile, verify, rho-sweep."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import guarantees as G
from .boosters import AlgorithmConfig, Variant, expand_grid, geometric_grid, run
from .checks import run_suite
from .data import (
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    load_dataset,
    save_dataset,
    standardize,
    write_csv,
)
from .errors import ConfigError, StagewiseError
from .oracles import certify, delta_max, solve_least_squares
from .spectral import analyze, gamma

log = logging.getLogger("stagewise")

TRACE_COLUMNS = ["iter", "j_k", "sign", "step", "train_error", "l1_norm", "l0_norm", "inf_corr"]
EMIT_CHOICES = {"trace", "bounds", "certificates", "profile_pairs"}


def _floats(text):
    if text is None or text == "":
        return []
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in _floats(text)]


def _names(text):
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


@dataclass
class ExperimentConfig:
    source: dict
    algorithms: list
    epsilons: list
    delta_fracs: list = field(default_factory=list)
    delta: float = None
    grid: str = None
    iters: int = 100
    stop_tolerance: float = 0.0
    oracle_tol: float = 1e-8
    center: bool = True
    out: str = "out"
    emit: list = field(default_factory=lambda: ["trace"])
    workers: int = 1

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required (--algo)")
        for a in self.algorithms:
            try:
                Variant(a)
            except ValueError:
                raise ConfigError(f"unknown algorithm {a!r}; choose from "
                                  f"{[v.value for v in Variant]}") from None
        if not self.epsilons:
            raise ConfigError("at least one learning rate is required (--eps)")
        bad = [f for f in self.delta_fracs if not 0.0 < f <= 1.0]
        if bad:
            raise ConfigError(f"--delta-frac values must lie in (0, 1], got {bad}")
        unknown = set(self.emit) - EMIT_CHOICES
        if unknown:
            raise ConfigError(f"unknown --emit values {sorted(unknown)}; "
                              f"choose from {sorted(EMIT_CHOICES)}")
        if self.iters < 0:
            raise ConfigError("--iters must be nonnegative")


# ---------------------------------------------------------------- data


def _spec_from_args(args):
    support = args.support
    if support is None:
        support = 10 if args.example == "B" else 5
    return SyntheticSpec(args.n, args.p, args.rho, args.snr, min(support, args.p), args.seed)


def _source_from_args(args):
    if args.data:
        return {"dir": args.data}
    if args.csv:
        return {"csv": args.csv, "response": args.response}
    return {"synthetic": asdict(_spec_from_args(args))}


def load_problem(source, center=True):
    if "dir" in source:
        raw = load_dataset(source["dir"])
    elif "csv" in source:
        resp = source.get("response", "y")
        raw = load_csv(source["csv"], int(resp) if str(resp).isdigit() else resp)
    else:
        raw = generate_synthetic(SyntheticSpec(**source["synthetic"])).data
    return standardize(raw, center=center)


# ---------------------------------------------------------------- fit


def _cells(cfg, dmax):
    """Expand the config into (name, AlgorithmConfig, meta) run cells."""
    cells = []
    for algo in cfg.algorithms:
        v = Variant(algo)
        for eps in cfg.epsilons:
            base = f"{v.value}_eps={eps!r}"
            if v is Variant.RFS:
                if cfg.delta is not None:
                    deltas = [(None, cfg.delta)]
                else:
                    fracs = cfg.delta_fracs or [1.0]
                    deltas = [(f, f * dmax) for f in fracs]
                for frac, d in deltas:
                    name = base + (f"_frac={frac!r}" if frac is not None else f"_delta={d!r}")
                    meta = {"delta": d, "delta_frac": frac}
                    cells.append((name, AlgorithmConfig(v, eps, cfg.iters, delta=d,
                                                        stop_tolerance=cfg.stop_tolerance), meta))
            elif v is Variant.PATH:
                fracs = _parse_grid(cfg.grid)
                grid = expand_grid([f * dmax for f in fracs], max(cfg.iters, 1))
                meta = {"grid_fracs": fracs, "grid_values": sorted(set(grid))}
                cells.append((base, AlgorithmConfig(v, eps, cfg.iters, delta_grid=grid,
                                                    stop_tolerance=cfg.stop_tolerance), meta))
            elif v is Variant.FSEK:
                sched = (eps,) * cfg.iters
                cells.append((base, AlgorithmConfig(v, eps, cfg.iters, epsilon_schedule=sched,
                                                    stop_tolerance=cfg.stop_tolerance), {}))
            else:
                cells.append((base, AlgorithmConfig(v, eps, cfg.iters,
                                                    stop_tolerance=cfg.stop_tolerance), {}))
    return cells


def _parse_grid(text):
    """'geom:lo:hi:count' (fractions of delta_max) or a comma list of fractions."""
    if not text:
        return list(geometric_grid(0.05, 1.0, 20))
    if str(text).startswith("geom:"):
        _, lo, hi, count = str(text).split(":")
        return list(geometric_grid(float(lo), float(hi), int(count)))
    return _floats(text)


def _trace_rows(tr):
    with_delta = tr.variant in (Variant.RFS, Variant.PATH)
    for k in range(tr.n_iters + 1):
        row = [k, int(tr.j[k]), tr.sign[k], tr.step[k], tr.train_error[k], tr.l1_norm[k],
               int(tr.l0_norm[k]), tr.inf_corr[k]]
        if with_delta:
            row.append(tr.delta[k])
        yield row


def write_trace(tr, path):
    header = list(TRACE_COLUMNS)
    if tr.variant in (Variant.RFS, Variant.PATH):
        header.append("delta")
    write_csv(path, header, _trace_rows(tr))


def _bounds_profile(tr, c):
    ks = np.arange(tr.n_iters + 1)
    v = tr.variant
    if v is Variant.PATH:
        return G.build_profile("path", c, ks, tr.config.delta_grid)
    if v is Variant.RFS:
        if math.isinf(tr.config.delta):
            return G.build_profile("fse", c, ks)
        return G.build_profile("rfs", c.with_delta(tr.config.delta), ks)
    if v in (Variant.LSBOOST, Variant.FSE):
        return G.build_profile(v.value, c, ks)
    return None


def _fit_cell(job):
    name, algo_cfg, meta, problem, consts, out_dir, emit, store = job
    tr = run(problem, algo_cfg, store_vectors=store)
    cell_dir = Path(out_dir) / name
    write_trace(tr, cell_dir / "trace.csv")
    written = ["trace.csv"]
    if "bounds" in emit:
        prof = _bounds_profile(tr, consts.with_epsilon(algo_cfg.epsilon))
        if prof is None:
            log.warning("no a priori bounds for %s; bounds.csv skipped", name)
        else:
            recs = list(prof.as_records())
            write_csv(cell_dir / "bounds.csv", list(recs[0]), [list(r.values()) for r in recs])
            written.append("bounds.csv")
    if "certificates" in emit:
        if algo_cfg.variant in (Variant.RFS, Variant.PATH) and math.isfinite(algo_cfg.delta_at(0)):
            rows = []
            for k in range(tr.n_iters + 1):
                d = algo_cfg.delta_at(max(k - 1, 0))
                cert = certify(problem, tr.beta(k), d)
                rows.append([k, d, cert.omega, cert.gap_bound, cert.primal_value, cert.dual_value])
            write_csv(cell_dir / "certificates.csv",
                      ["iter", "delta", "omega", "gap_bound", "primal_value", "dual_value"], rows)
            written.append("certificates.csv")
        else:
            log.warning("certificates need a finite delta; skipped for %s", name)
    return {"cell": name, "files": written, "iters": tr.n_iters,
            "stop_reason": tr.stop_reason, **meta}


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_fit(cfg):
    problem = load_problem(cfg.source, cfg.center)
    summary = analyze(problem)
    ls = solve_least_squares(problem, summary)
    needs_dmax = any(a in ("rfs", "path") for a in cfg.algorithms) and cfg.delta is None
    dmax = delta_max(problem, ls, summary) if needs_dmax else None
    consts = G.Constants.from_problem(problem, min(cfg.epsilons[0], 1.0), summary=summary, ls=ls)
    store = "certificates" in cfg.emit or any(a == "fsek" for a in cfg.algorithms)
    jobs = [(name, a, meta, problem, consts, cfg.out, cfg.emit, store)
            for name, a, meta in _cells(cfg, dmax)]
    cells = _map(_fit_cell, jobs, cfg.workers)
    manifest = {
        "config": asdict(cfg),
        "n": problem.n,
        "p": problem.p,
        "delta_max": dmax,
        "lambda_pmin": summary.lambda_pmin,
        "fitted_norm": ls.fitted_norm,
        "loss_star": ls.loss_star,
        "cells": cells,
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))
    return 0


# ---------------------------------------------------------------- profile


def profile_rows(consts, iters, variants=("lsboost",), epsilons=(1.0,), traces=()):
    """Observed and theoretical (train error, l1) pairs with normalized columns."""
    rows = []

    def emit(source, variant, eps, ks, train, l1):
        train = np.asarray(train, dtype=float)
        l1 = np.asarray(l1, dtype=float)
        t0 = train[0] if train[0] != 0 else 1.0
        l1_max = float(np.max(l1)) if l1.size and np.max(l1) > 0 else 1.0
        for k, te, s in zip(ks, train, l1):
            rows.append([source, variant, eps, int(k), te, s, te / t0, s / l1_max, l1_max])

    ks = np.arange(iters + 1)
    for v in variants:
        for eps in epsilons:
            c = consts.with_epsilon(eps)
            train, l1 = G.theoretical_pairs(c, ks, v)
            emit("theoretical", v, eps, ks, train, l1)
    for tr in traces:
        emit("observed", tr.variant.value, tr.config.epsilon,
             np.arange(tr.n_iters + 1), tr.train_error, tr.l1_norm)
    return rows


PROFILE_HEADER = ["source", "variant", "eps", "iter", "train_error", "l1_norm",
                  "train_error_rel", "l1_rel", "l1_normalizer"]


def cmd_profile(args, cfg):
    variants = [a for a in cfg.algorithms if a in ("lsboost", "fse")]
    if not variants:
        raise ConfigError("profile supports --algo lsboost and/or fse")
    if args.kappa is not None:
        lam = args.p / args.kappa
        consts = G.Constants(args.n, args.p, lam, args.fitted_norm, args.loss_star, 1.0)
        traces = []
    else:
        problem = load_problem(cfg.source, cfg.center)
        consts = G.Constants.from_problem(problem, 1.0)
        traces = [run(problem, AlgorithmConfig(v, e, cfg.iters), store_vectors=False)
                  for v in variants for e in cfg.epsilons]
    rows = profile_rows(consts, cfg.iters, variants, cfg.epsilons, traces)
    write_csv(Path(cfg.out) / "profile_pairs.csv", PROFILE_HEADER, rows)
    return 0


# ---------------------------------------------------------------- verify


def cmd_verify(args):
    offset = args.corrupt_gamma if args.self_test else 0.0
    results = run_suite(seed=args.seed, gamma_offset=offset)
    report = {
        "passed": all(r.passed for r in results),
        "seed": args.seed,
        "gamma_offset": offset,
        "families": [r.as_dict() for r in results],
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2))
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} (checks={r.checks}, "
              f"max_violation={r.max_violation:.3g})")
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------- rho sweep


def _sweep_cell(job):
    n, p, rho, seed = job
    problem = standardize(generate_synthetic(SyntheticSpec(n, p, rho, 1.0, min(5, p), seed)).data)
    s = analyze(problem)
    return s.lambda_pmin, gamma(s, 1.0)


def rho_sweep(n, ps, rhos, repeats=1, seed=0, workers=1):
    jobs, keys = [], []
    for p in ps:
        for rho in rhos:
            for rep in range(repeats):
                jobs.append((n, p, rho, seed + 1000003 * rep + 7919 * p + int(round(rho * 1000))))
                keys.append((p, rho))
    values = _map(_sweep_cell, jobs, workers)
    rows = []
    for p in ps:
        for rho in rhos:
            got = np.array([v for kk, v in zip(keys, values) if kk == (p, rho)])
            sd = got.std(axis=0, ddof=1) if len(got) > 1 else np.zeros(2)
            rows.append([rho, p, n, repeats, got[:, 0].mean(), got[:, 1].mean(), sd[0], sd[1]])
    return rows


SWEEP_HEADER = ["rho", "p", "n", "repeats", "lambda_pmin_mean", "gamma_mean",
                "lambda_pmin_sd", "gamma_sd"]


def cmd_rho_sweep(args):
    rows = rho_sweep(args.n, _ints(args.ps), _floats(args.rhos), args.repeats, args.seed,
                     args.workers)
    write_csv(Path(args.out) / "gamma_vs_p.csv", SWEEP_HEADER, rows)
    for p in sorted({r[1] for r in rows}):
        g = [r[5] for r in sorted((r for r in rows if r[1] == p), key=lambda r: r[0])]
        if any(b < a for a, b in zip(g, g[1:])):
            log.warning("gamma is not nondecreasing in rho at p=%d (averaged over %d repeats)",
                        p, args.repeats)
    return 0


# ---------------------------------------------------------------- gen


def cmd_gen(args):
    spec = _spec_from_args(args)
    draw = generate_synthetic(spec)
    out = Path(args.out)
    save_dataset(draw.data, out)
    meta = {"spec": asdict(spec), "beta_pop": draw.beta_pop.tolist(),
            "noise_var": draw.noise_var, "rng": "numpy PCG64"}
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    return 0


# ---------------------------------------------------------------- parser


def _add_data_args(sp):
    g = sp.add_argument_group("data")
    g.add_argument("--data", help="directory holding X.csv and y.csv")
    g.add_argument("--csv", help="single CSV file with a response column")
    g.add_argument("--response", default="y", help="response column name or index")
    g.add_argument("--example", choices=["A", "B"], default="A",
                   help="synthetic family: A has 5 leading ones, B has 10")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--p", type=int, default=100)
    g.add_argument("--rho", type=float, default=0.0)
    g.add_argument("--snr", type=float, default=1.0)
    g.add_argument("--support", type=int, default=None)
    g.add_argument("--no-center", dest="center", action="store_false")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override flag defaults")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="stagewise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", parents=[common], help="write a synthetic dataset")
    _add_data_args(sp)

    for name, helptext in (("fit", "run boosting engines and write traces"),
                           ("profile", "write (training error, l1) profile pairs")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        _add_data_args(sp)
        sp.add_argument("--algo", default="lsboost",
                        help="comma list of lsboost, fse, fsek, rfs, path")
        sp.add_argument("--eps", default="0.01", help="comma list of learning rates")
        sp.add_argument("--delta", type=float, default=None, help="absolute delta for rfs")
        sp.add_argument("--delta-frac", default="", help="comma list of fractions of delta_max")
        sp.add_argument("--grid", default=None,
                        help="path grid: 'geom:lo:hi:count' or comma list (fractions of delta_max)")
        sp.add_argument("--iters", type=int, default=100)
        sp.add_argument("--tol", type=float, default=0.0, help="early-stop threshold on ||X'r||_inf")
        sp.add_argument("--oracle-tol", type=float, default=1e-8)
        sp.add_argument("--emit", default="trace",
                        help="comma list of trace, bounds, certificates, profile_pairs")
        sp.add_argument("--workers", type=int, default=1)
        if name == "profile":
            sp.add_argument("--kappa", type=float, default=None,
                            help="theory-only profile from constants (uses --n, --p)")
            sp.add_argument("--fitted-norm", type=float, default=1.0)
            sp.add_argument("--loss-star", type=float, default=0.0)

    sp = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sp.add_argument("--self-test", action="store_true",
                    help="negative control: corrupt gamma so bound checks must fail")
    sp.add_argument("--corrupt-gamma", type=float, default=-0.1,
                    help="offset added to gamma in self-test mode")

    sp = sub.add_parser("rho-sweep", parents=[common], help="lambda_pmin and gamma over (rho, p)")
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--ps", default="50,100,200,500")
    sp.add_argument("--rhos", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    sp.add_argument("--repeats", type=int, default=10)
    sp.add_argument("--workers", type=int, default=1)
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args


def experiment_config(args):
    return ExperimentConfig(
        source=_source_from_args(args),
        algorithms=_names(args.algo),
        epsilons=_floats(args.eps),
        delta_fracs=_floats(args.delta_frac),
        delta=args.delta,
        grid=args.grid,
        iters=args.iters,
        stop_tolerance=args.tol,
        oracle_tol=args.oracle_tol,
        center=args.center,
        out=args.out,
        emit=_names(args.emit),
        workers=args.workers,
    )


def main(argv=None):
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "fit":
            return cmd_fit(experiment_config(args))
        if args.command == "profile":
            return cmd_profile(args, experiment_config(args))
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_rho_sweep(args)
    except StagewiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
