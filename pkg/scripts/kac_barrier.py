"""Expected return times on the reflecting barrier walk compared with 1 / tr(pi(x))."""

import argparse
import json

from qwalk import kac
from qwalk.walkmodel import E11


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p11", type=float, default=1 / 3)
    ap.add_argument("--p22", type=float, default=None)
    ap.add_argument("--M", type=int, default=60)
    ap.add_argument("--horizon", type=int, default=4000)
    ap.add_argument("--sites", type=int, nargs="+", default=[0, 2])
    args = ap.parse_args()

    for variant in ("retaining", "literal"):
        spec = kac.barrier_walk(args.p11, args.p22, m=args.M, variant=variant)
        for x in args.sites:
            report = kac.kac_identity_check(spec, E11, x, args.horizon)
            print(json.dumps({"variant": variant, "x": x, **report.to_json()}))


if __name__ == "__main__":
    main()
