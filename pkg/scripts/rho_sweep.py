"""Mean lambda_pmin and linear rate gamma(1) as the design correlation grows.

    python scripts/rho_sweep.py --repeats 20 --workers 4
"""
import argparse

from stagewise.cli import SWEEP_HEADER, rho_sweep
from stagewise.data import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/gamma_vs_p.csv")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--ps", default="20,50,100,500")
    ap.add_argument("--rhos", default="0,0.1,0.3,0.5,0.7,0.9")
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ps = [int(v) for v in args.ps.split(",")]
    rhos = [float(v) for v in args.rhos.split(",")]
    rows = rho_sweep(args.n, ps, rhos, args.repeats, args.seed, args.workers)
    write_csv(args.out, SWEEP_HEADER, rows)
    for row in rows:
        print(f"p={row[1]:4d} rho={row[0]:.1f} lambda_pmin={row[4]:.4f} gamma={row[5]:.6f}")


if __name__ == "__main__":
    main()
