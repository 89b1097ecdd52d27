#!/usr/bin/env python3
"""Desk-scale light storage and retrieval, end to end.

Runs the full mean-field integrator through the standard ramp: the pulse
slows, maps onto the molecular field while the control is off, and is
re-accelerated on retrieval.  The summary reports the state-mapping
residual, the retrieval fidelity and efficiency, and the snapshots
directory holds the field profiles over time.
"""

import argparse
import sys

from slowmol.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/storage")
    ap.add_argument("--n-z", type=int, default=1024)
    args = ap.parse_args()
    return cli_main([
        "store", "--out", args.out,
        "--set", "preset=desk-storage",
        "--set", f"grid.n_z={args.n_z}",
    ])


if __name__ == "__main__":
    sys.exit(main())
