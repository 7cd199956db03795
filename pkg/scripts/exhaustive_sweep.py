"""Planted exhaustive search: measured mean queries vs (S+1)/2 and (pi/4) sqrt(S)."""

import argparse
import sys
import time

import numpy as np

from zsigil.attack_lab import EXHAUSTIVE_COLUMNS, DiscretizedKeySpace, run_exhaustive_experiment, to_csv

GRIDS = {256: (2, 8), 4096: (8, 4), 65536: (16, 4)}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    reports = []
    for size, (levels, dim) in GRIDS.items():
        t0 = time.perf_counter()
        rep = run_exhaustive_experiment(DiscretizedKeySpace(levels, dim), args.trials, rng)
        reports.append(rep)
        print(f"S={size}: mean {rep.mean_queries:.1f} (expect {(size + 1) / 2:.1f}), "
              f"classical/quantum {rep.ratio:.2f}, {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    sys.stdout.write(to_csv(reports, EXHAUSTIVE_COLUMNS))


if __name__ == "__main__":
    main()
