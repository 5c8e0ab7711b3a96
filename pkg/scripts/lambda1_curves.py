"""Leading eigenvalue branch of the sec7 symbol against cos k, and their 100th powers (CSV).

Also prints, to stderr, the agreement with a direct eigen-solve and the return ratio check.
"""

import argparse
import csv
import sys

import numpy as np

from qwalk import fourier, walkmodel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--power", type=int, default=100)
    ap.add_argument("--ratio-at", type=int, default=400, help="even time for p0 / alpha")
    args = ap.parse_args()

    rows = fourier.power_comparison_rows(args.grid, args.power)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: f"{v:.17g}" for k, v in r.items()})

    k = fourier.grid(args.grid)
    sym = fourier.symbol(walkmodel.sec7(), k)
    lam = fourier.sec7_lambda1(k)
    err = max(np.min(np.abs(np.linalg.eigvals(sym[i]) - lam[i])) for i in range(len(k)))
    ratio = fourier.sec7_return_ratio(args.ratio_at)
    print(f"closed form vs eigvals: {err:.2e}", file=sys.stderr)
    print(f"p0/alpha at {args.ratio_at}: {ratio:.6f} (pi * ratio = {np.pi * ratio:.6f})", file=sys.stderr)


if __name__ == "__main__":
    main()
