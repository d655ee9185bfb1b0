"""Fitted Bowen-ball decay rate against the formula, at several eps.

The limit eps -> 0 cannot be taken numerically, so the slope is reported
per eps and extrapolation is left to the reader.

    python3 scripts/decay_rate.py --action fibonacci --eps 0.01 0.02 0.05
"""

import argparse
import csv
import sys

from slowent.catalog import CATALOG
from slowent.bowen import estimate_local_slow_entropy
from slowent.norms import NormSpec

DEFAULT_GRID = {"fibonacci": list(range(4, 13)), "t4_block": [1, 2, 3, 4]}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--action", default="fibonacci", choices=sorted(DEFAULT_GRID))
    ap.add_argument("--norm", default=None, help="l1, l2 or linf (default l2 for rank 1, linf otherwise)")
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.02, 0.05])
    ap.add_argument("--s", type=float, nargs="+", default=None)
    ap.add_argument("--method", default="auto", choices=["auto", "exact", "mc"])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    action = CATALOG[args.action]()
    kind = args.norm or ("l2" if action.rank == 1 else "linf")
    norm = NormSpec(kind, action.rank)
    grid = args.s or DEFAULT_GRID[args.action]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["eps", "slope", "formula", "relative_gap", "r_squared", "dropped"])
    for eps in args.eps:
        fit = estimate_local_slow_entropy(action, norm, None, eps, grid, args.samples, args.seed, method=args.method)
        w.writerow([eps, f"{fit.slope:.6f}", f"{fit.formula_delta:.6f}", f"{fit.relative_gap:+.4f}", f"{fit.r_squared:.6f}", " ".join(map(str, fit.dropped))])


if __name__ == "__main__":
    main()
