#!/usr/bin/env python3
"""Objective-gap traces for gradient descent at several step sizes.

Writes one CSV per alpha (columns: k, f_minus_fstar) ready for plotting the
convergence-vs-step-size comparison; alpha = 0.5 is the power-method-
equivalent baseline.

    python3 scripts/step_size_sweep.py --n 1024 --gap 1e-3 --alphas 0.5,0.7,0.9,0.99
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from splitmerge import SolverConfig, SyntheticSpec, generate, init_vector, solve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--gap", type=float, default=1e-3)
    parser.add_argument("--alphas", default="0.5,0.7,0.9,0.99")
    parser.add_argument("--eps", type=float, default=1e-2)
    parser.add_argument("--max-iter", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="gd_sweep")
    args = parser.parse_args()

    op, truth = generate(SyntheticSpec(n=args.n, gap=args.gap, seed=args.seed))
    x0 = init_vector(args.n, np.random.SeedSequence((args.seed, 1)), op)
    f_star = -truth.lambda1 / 4.0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    for alpha in (float(s) for s in args.alphas.split(",")):
        config = SolverConfig(
            "gd_difference", alpha=alpha, eps=args.eps, max_iter=args.max_iter
        )
        res = solve(op.share(), config, ground_truth=truth, x0=x0)
        path = out_dir / f"gd_alpha_{alpha:g}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "f_minus_fstar"])
            for k, f in zip(res.trace.k, res.trace.f_value):
                writer.writerow([k, f"{f - f_star:.17g}"])
        print(f"alpha={alpha:g}: {res.iterations} iterations -> {path}")


if __name__ == "__main__":
    main()
