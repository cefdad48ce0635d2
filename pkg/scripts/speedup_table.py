#!/usr/bin/env python3
"""Sweep matrix sizes and eigengaps, reporting split-merge vs power speed-ups.

Desk-scale defaults finish in a couple of minutes; raise --n-list / --trials
for larger reproductions.

    python3 scripts/speedup_table.py --n-list 256,512,1024 --gaps 1e-1,1e-2,1e-3
"""

import argparse
import statistics

import numpy as np

from splitmerge import SolverConfig, SyntheticSpec, generate, init_vector, solve


def run_cell(n, gap, trials, seed):
    it_r, mv_r, t_r = [], [], []
    for trial in range(trials):
        op, truth = generate(SyntheticSpec(n=n, gap=gap, seed=seed + trial))
        x0 = init_vector(n, np.random.SeedSequence((seed, trial, 1)), op)
        sm = solve(op.share(), SolverConfig("split_merge"), ground_truth=truth, x0=x0)
        pw = solve(op.share(), SolverConfig("power"), ground_truth=truth, x0=x0)
        it_r.append(pw.iterations / sm.iterations)
        mv_r.append(pw.trace.matvecs[-1] / sm.trace.matvecs[-1])
        t_r.append(pw.trace.seconds[-1] / sm.trace.seconds[-1])
    med = statistics.median
    return med(it_r), med(mv_r), med(t_r)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-list", default="256,512,1024")
    parser.add_argument("--gaps", default="1e-1,1e-2,1e-3")
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'n':>6} {'gap':>8} {'iter x':>8} {'matvec x':>9} {'time x':>8}")
    for n in (int(s) for s in args.n_list.split(",")):
        for gap in (float(s) for s in args.gaps.split(",")):
            it, mv, t = run_cell(n, gap, args.trials, args.seed)
            print(f"{n:>6} {gap:>8.0e} {it:>8.2f} {mv:>9.2f} {t:>8.2f}")


if __name__ == "__main__":
    main()
