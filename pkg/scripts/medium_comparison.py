#!/usr/bin/env python3
"""Slow-light curves for the four matter-wave medium families.

Alongside the velocity curves, the summary lists the fitted slowdown
scaling exponents (1 for an atomic ensemble, 2 for dimers, 3 for the
trimer assembly).
"""

import argparse
import sys

from slowmol.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/mediums")
    ap.add_argument("--n-total", type=float, default=3.0e6)
    args = ap.parse_args()
    return cli_main([
        "mediums", "--out", args.out,
        "--set", f"sweep.n_total={args.n_total}",
        "--set", "run.gnuplot=true",
    ])


if __name__ == "__main__":
    sys.exit(main())
