"""Grover query and gate-cost table over bit-lengths and density exponents."""

import argparse
import sys

from zsigil.attack_lab import SearchSpaceModel, cosmological_margin, grover_queries, to_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bits", type=int, nargs="+", default=[16, 32, 64, 128, 256, 512, 1024, 2048])
    parser.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0])
    parser.add_argument("--degree", type=int, default=2, help="gate cost per query is n^degree")
    args = parser.parse_args()

    rows = []
    for alpha in args.alpha:
        for n in args.bits:
            est = grover_queries(SearchSpaceModel(n, alpha), args.degree)
            above_hi, _ = cosmological_margin(est.lower_bound_log10)
            rows.append({
                "n": n,
                "alpha": alpha,
                "lower_bound_log2": est.lower_bound_log2,
                "log10_queries": f"{est.log10_queries:.4f}",
                "log10_gate_cost": f"{est.log10_gate_cost:.4f}",
                "orders_above_1e122": f"{above_hi:.3f}",
            })
    sys.stdout.write(to_csv(rows))


if __name__ == "__main__":
    main()
