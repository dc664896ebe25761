"""Two-runs process: bound versus bias-corrected empirical d2 over a grid of q."""

import argparse
import json
import sys

from ppwass.cli import _order
from ppwass.verify.experiments import experiment_two_runs, rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--q", type=float, nargs="+", default=[0.02, 0.05, 0.1])
    ap.add_argument("--p", type=_order, default=1.0)
    ap.add_argument("--n-samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="full reports as JSON instead of CSV rows")
    args = ap.parse_args()

    reports = [experiment_two_runs(args.n, q, args.p, args.n_samples, seed=(args.seed, k)) for k, q in enumerate(args.q)]
    if args.json:
        print(json.dumps([json.loads(r.to_json()) for r in reports], indent=2))
    else:
        rows = [row for q, r in zip(args.q, reports) for row in r.rows(f"two_runs.q{q:g}")]
        sys.stdout.write(rows_to_csv(rows))
    return 0 if all(r.verdict for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
