"""Site distributions of the Hadamard open and unitary walks at a given time (CSV)."""

import argparse
import csv
import sys

from qwalk import walkmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--time", type=int, default=12)
    ap.add_argument("--state", choices=["up", "down", "balanced"], default="balanced")
    args = ap.parse_args()

    psi = {"up": walkmodel.UP, "down": walkmodel.DOWN, "balanced": walkmodel.BALANCED}[args.state]
    coin = walkmodel.hadamard()
    oqw = walkmodel.site_distribution(psi, args.time, coin, walk="oqw")
    uqw = walkmodel.site_distribution(psi, args.time, coin, walk="uqw")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["site", "oqw", "uqw"])
    for s in sorted(oqw):
        w.writerow([s, f"{oqw[s]:.17g}", f"{uqw[s]:.17g}"])


if __name__ == "__main__":
    main()
