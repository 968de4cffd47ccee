"""Iteration and shrinkage ratios of LS-Boost to FS for reaching a relative prediction error.

    python scripts/efficiency_ratios.py --out runs/efficiency.csv
"""
import argparse

import numpy as np

from stagewise.guarantees import Constants, efficiency
from stagewise.data import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/efficiency.csv")
    ap.add_argument("--points", type=int, default=100)
    ap.add_argument("--kappa", type=float, default=10.0, help="p / lambda_pmin of the design")
    args = ap.parse_args()

    c = Constants(n=100, p=100, lambda_pmin=100.0 / args.kappa, fitted_norm=1.0,
                  loss_star=0.0, epsilon=1.0)
    header = ["tau", "k_lsboost", "k_fse", "eta", "vartheta", "eta_continuous",
              "vartheta_continuous"]
    rows = []
    for tau in np.linspace(1.0 / args.points, 1.0, args.points)[:-1]:
        r = efficiency(c, tau)
        rows.append([r.tau, r.k_lsboost, r.k_fse, r.eta, r.vartheta, r.eta_continuous,
                     r.vartheta_continuous])
    write_csv(args.out, header, rows)
    best = max(rows, key=lambda row: row[5])
    print(f"max continuous eta {best[5]:.4f} at tau={best[0]:.3f}; "
          f"max vartheta {max(r[6] for r in rows):.4f}")


if __name__ == "__main__":
    main()
