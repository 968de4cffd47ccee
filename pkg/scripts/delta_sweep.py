"""R-FS across a range of l1 budgets, compared with the exact Lasso value at each budget.

For every budget fraction the script records the final training error,
the Lasso optimum, the duality certificate of the final iterate and the
a priori gap bound.

    python scripts/delta_sweep.py --n 50 --p 100 --iters 3000
"""
import argparse
import math

import numpy as np

from stagewise import guarantees as G
from stagewise.boosters import AlgorithmConfig, run
from stagewise.data import SyntheticSpec, generate_synthetic, standardize, write_csv
from stagewise.oracles import certify, delta_max, solve_lasso, solve_least_squares
from stagewise.spectral import analyze


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/delta_sweep.csv")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--p", type=int, default=100)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--iters", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = SyntheticSpec(args.n, args.p, args.rho, 1.0, min(10, args.p), args.seed)
    problem = standardize(generate_synthetic(spec).data)
    summary = analyze(problem)
    ls = solve_least_squares(problem, summary)
    dmax = delta_max(problem, ls, summary)

    rows = []
    for frac in np.linspace(0.1, 1.0, 10):
        delta = float(frac * dmax)
        c = G.Constants.from_problem(problem, args.eps, delta, summary, ls)
        tr = run(problem, AlgorithmConfig("rfs", args.eps, args.iters, delta=delta),
                 store_vectors=False)
        lasso = ls.loss_star if frac >= 1.0 else solve_lasso(problem, delta, 1e-6,
                                                              summary=summary).loss_star_delta
        cert = certify(problem, tr.final_beta, delta)
        bound = G.rfs_bounds(c, args.iters)["train_gap_bound"]
        rows.append([frac, delta, tr.train_error[-1], lasso, tr.train_error[-1] - lasso,
                     float(bound), cert.omega, cert.gap_bound])
        print(f"delta/dmax={frac:.1f} gap={rows[-1][4]:.3e} bound={float(bound):.3e} "
              f"omega={cert.omega:.3e}")
    write_csv(args.out, ["delta_frac", "delta", "train_error", "lasso_loss", "gap",
                         "gap_bound", "omega", "certificate_bound"], rows)
    if not all(math.isfinite(r[4]) for r in rows):
        raise SystemExit("non-finite gap")


if __name__ == "__main__":
    main()
