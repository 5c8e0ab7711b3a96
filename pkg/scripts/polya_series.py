"""Unmonitored return series, Polya partial products and the log-log slope for each preset."""

import argparse

from qwalk import monitored, walkmodel
from qwalk.walkmodel import E11


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=400)
    args = ap.parse_args()

    coins = [walkmodel.hadamard(), walkmodel.bitflip(0.3), walkmodel.bitflip(0.5), walkmodel.sec7()]
    print(f"{'coin':<16} {'sum p0':>10} {'Polya':>10} {'slope':>8}  hint")
    for coin in coins:
        s = monitored.unmonitored_p0_series(coin, E11, args.horizon)
        summary = monitored.series_summary(s)
        _, hint = monitored.polya_number(s)
        print(f"{coin.name:<16} {summary['cumulative']:>10.5f} {summary['polya_partial']:>10.6f} "
              f"{summary['slope']:>8.3f}  {hint}")


if __name__ == "__main__":
    main()
