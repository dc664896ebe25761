"""Table of the Stein constants gamma1, gamma2 and the factors c1, c2 against p."""

import argparse
import csv
import sys

import numpy as np

from ppwass.metrics import INF
from ppwass.stein import c1, c2, gamma1, gamma2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, nargs="+", default=[1.0, 10.0, 100.0])
    ap.add_argument("--n-points", type=int, default=25, help="log-spaced orders in [1, 1e3]")
    args = ap.parse_args()

    ps = list(np.unique(np.round(np.logspace(0, 3, args.n_points), 6))) + [INF]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "gamma1", "gamma2"] + [f"{k}_lam{lam:g}" for lam in args.lam for k in ("c1", "c2")])
    for p in ps:
        finite = p < INF
        row = [p, gamma1(p) if finite else "", gamma2(p) if 1 < p < INF else ""]
        row += [v for lam in args.lam for v in (c1(p, lam), c2(p, lam))]
        w.writerow(["inf" if x == INF else (f"{x:.10g}" if isinstance(x, float) else x) for x in row])
    return 0


if __name__ == "__main__":
    sys.exit(main())
