#!/usr/bin/env python3
"""Print worst-case bound values across problem sizes.

Shows the sqrt(T) growth of the regret bound and the 1/sqrt(n) decay of the
estimation bound at their optimized separations, for a few tail levels.
"""

import argparse

from cvarbounds.bounds import optimal_bound_constant, optimal_gap, optimal_separation
from cvarbounds.risk import RiskLevel


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.5, 0.9])
    parser.add_argument("--horizons", type=int, nargs="+", default=[100, 400, 1600, 6400])
    parser.add_argument("--samples", type=int, nargs="+", default=[25, 100, 400, 1600])
    args = parser.parse_args()

    print("tail level, optimized constant:")
    for alpha in args.alphas:
        print(f"  alpha={alpha:<5} c={optimal_bound_constant(RiskLevel(alpha)):.6f}")

    print("\nbandit regret bound at the worst-case gap (value / sqrt(T) is flat):")
    header = "  alpha " + "".join(f"{f'T={T}':>14}" for T in args.horizons)
    print(header)
    for alpha in args.alphas:
        level = RiskLevel(alpha)
        cells = []
        for horizon in args.horizons:
            g, value = optimal_gap(horizon, level)
            cells.append(f"{value:>9.4f} ({value / horizon**0.5:.4f})".rjust(14))
        print(f"  {alpha:<6}" + "".join(cells))

    print("\nestimation bound at the worst-case separation (value * sqrt(n) is flat):")
    header = "  alpha " + "".join(f"{f'n={n}':>14}" for n in args.samples)
    print(header)
    for alpha in args.alphas:
        level = RiskLevel(alpha)
        cells = []
        for n in args.samples:
            d, value = optimal_separation(n, level)
            cells.append(f"{value:>9.5f} ({value * n**0.5:.4f})".rjust(14))
        print(f"  {alpha:<6}" + "".join(cells))


if __name__ == "__main__":
    main()
