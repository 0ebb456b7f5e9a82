"""Regenerate the data behind every figure as CSV files.

    python3 scripts/run_figures.py --out results --points 41 --threads 2
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from eee_urllc.channel import DEFAULT_EVAL
from eee_urllc.cli import emit
from eee_urllc.scenarios import FIGURES, default_spec, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--points", type=int, default=41, help="grid points on the swept axis")
    ap.add_argument("--figs", type=int, nargs="*", default=list(FIGURES), help="figures to run")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fig in args.figs:
        t0 = time.time()
        table = run_sweep(default_spec(fig, args.points), DEFAULT_EVAL, args.threads)
        path = out / f"fig{fig}.csv"
        emit(table, str(path))
        print(f"fig{fig}: {len(table.rows)} rows -> {path} ({time.time() - t0:.1f} s)")


if __name__ == "__main__":
    main()
