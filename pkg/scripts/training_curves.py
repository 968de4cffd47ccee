"""Training error and l1 norm against iteration for FS and LS-Boost on the two synthetic designs.

Writes one CSV per (design, algorithm, learning rate) plus a summary of the
error at a few checkpoints.

    python scripts/training_curves.py --out runs/curves --iters 2000
"""
import argparse
from pathlib import Path

from stagewise.boosters import AlgorithmConfig, run
from stagewise.data import SyntheticSpec, generate_synthetic, standardize, write_csv

DESIGNS = {"A": SyntheticSpec.eg_a, "B": SyntheticSpec.eg_b}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/curves")
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--p", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)

    summary = []
    checkpoints = [k for k in (10, 100, 1000, args.iters) if k <= args.iters]
    for name, make in DESIGNS.items():
        problem = standardize(generate_synthetic(make(n=args.n, p=args.p, seed=args.seed)).data)
        for algo, rates in (("fse", (1e-3, 1e-2, 0.1)), ("lsboost", (1e-2, 0.1, 1.0))):
            for eps in rates:
                tr = run(problem, AlgorithmConfig(algo, eps, args.iters), store_vectors=False)
                rows = zip(range(tr.n_iters + 1), tr.train_error, tr.l1_norm, tr.l0_norm)
                write_csv(out / f"eg{name}_{algo}_eps={eps:g}.csv",
                          ["iter", "train_error", "l1_norm", "l0_norm"], rows)
                summary.append([name, algo, eps] + [tr.train_error[min(k, tr.n_iters)]
                                                     for k in checkpoints])
                print(f"eg{name} {algo:8s} eps={eps:<6g} final train error {tr.train_error[-1]:.5f}")
    write_csv(out / "summary.csv", ["design", "algo", "eps"] + [f"k={k}" for k in checkpoints],
              summary)


if __name__ == "__main__":
    main()
