"""Hadamard first-return table for both walks, by path sums and by monitored evolution."""

import argparse
from fractions import Fraction

from qwalk import firstreturn, monitored, walkmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-steps", type=int, default=16)
    args = ap.parse_args()

    coin = walkmodel.hadamard()
    paths = firstreturn.cumulative_return(coin, walkmodel.DOWN, args.max_steps // 2)
    taboo = monitored.monitored_table(coin, walkmodel.DOWN, args.max_steps)
    print(f"{'2k':>3} {'OQW':>12} {'UQW':>12} {'max |paths - taboo|':>20}")
    for i, step in enumerate(paths.steps):
        o = Fraction(paths.oqw[i]).limit_denominator(2**20)
        u = Fraction(paths.uqw[i]).limit_denominator(2**20)
        diff = max(abs(paths.oqw[i] - taboo.oqw[i]), abs(paths.uqw[i] - taboo.uqw[i]))
        print(f"{step:>3} {str(o):>12} {str(u):>12} {diff:>20.2e}")
    print(f"cumulative: OQW {paths.oqw_cumulative[-1]:.10f}  UQW {paths.uqw_cumulative[-1]:.10f}")


if __name__ == "__main__":
    main()
