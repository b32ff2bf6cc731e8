#!/usr/bin/env python3
"""Check median cross-validation improvements on the 41 ulcer-surgery tables.

The tables are not shipped with this repository. Transcribe them into a CSV
with header `id,y1,n1,y2,n2` and run

    python3 scripts/check_crossval_medians.py ulcer.csv

The reference medians of 100 * (S_h - S_0) are 0.54% for h = 1 and 0.68% for
h = 2; both are checked to within 0.1 percentage points.
"""

import argparse
import json
import subprocess
import sys

EXPECTED = {1: 0.54, 2: 0.68}
TOLERANCE = 0.1


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", help="CSV with header id,y1,n1,y2,n2")
    ap.add_argument(
        "--bin",
        default=None,
        help="path to the imprior binary (default: cargo run --release)",
    )
    args = ap.parse_args()

    cmd = [args.bin] if args.bin else [
        "cargo", "run", "--release", "-q", "-p", "imprior-cli", "--",
    ]
    cmd += ["crossval", "--data", args.tables, "--h", "0,1,2"]
    out = subprocess.run(cmd, check=True, capture_output=True, text=True)
    summary = json.loads(out.stdout)["summary"]

    ok = True
    for h, want in EXPECTED.items():
        got = summary[f"median_improvement_pct_h{h}"]
        passed = abs(got - want) <= TOLERANCE
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} h={h}: median {got:.3f}% vs {want}% (tol {TOLERANCE})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
