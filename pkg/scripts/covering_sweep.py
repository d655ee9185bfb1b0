"""Greedy Bowen-ball covers of the 2-torus for the cat map.

Prints count, the lower bracket (1 - delta)/vol and the log-count slope.
"""

import argparse

import numpy as np

from slowent.catalog import fibonacci
from slowent.cover import covering_number
from slowent.norms import NormSpec


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--s", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--grid-resolution", type=float, default=None)
    args = ap.parse_args()

    action, norm = fibonacci(), NormSpec("l2", 1)
    runs = []
    print(f"{'s':>3} {'count':>9} {'lower':>12} {'C':>6} {'grid':>6} {'uncovered':>9}")
    for s in args.s:
        c = covering_number(action, norm, s, args.eps, args.delta, args.grid_resolution)
        runs.append(c)
        print(f"{s:>3} {c.count:>9} {c.lower_bracket:>12.1f} {c.discretization:>6.3f} {c.grid_size:>6} {c.uncovered_fraction:>9.4f}")
    if len(runs) >= 2:
        slope = np.polyfit([c.s for c in runs], np.log([c.count for c in runs]), 1)[0]
        print(f"log-count slope {slope:.4f}")


if __name__ == "__main__":
    main()
