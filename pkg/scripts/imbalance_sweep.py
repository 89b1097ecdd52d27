#!/usr/bin/env python3
"""Group-velocity curves for a set of population imbalances.

Writes one CSV per imbalance ratio plus a manifest into the output
directory; plot vg_over_c against t_us to see every curve drop to the
decay floor during storage and recover on retrieval, with the balanced
split slowest throughout.
"""

import argparse
import sys

from slowmol.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/imbalance")
    ap.add_argument("--etas", default="0.25,1,4,15")
    ap.add_argument("--n-total", type=float, default=3.0e6)
    args = ap.parse_args()
    return cli_main([
        "imbalance", "--out", args.out,
        "--set", f"sweep.etas={args.etas}",
        "--set", f"sweep.n_total={args.n_total}",
        "--set", "run.gnuplot=true",
    ])


if __name__ == "__main__":
    sys.exit(main())
