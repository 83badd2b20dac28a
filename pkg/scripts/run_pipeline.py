#!/usr/bin/env python3
"""Small end-to-end run through the command line interface.

generate -> label -> train -> compare -> report, all under --out. Defaults
finish in well under a minute; scale up with --n, --T and --epochs.

    python scripts/run_pipeline.py --out runs/small
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from dynim.cli import main as cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/small")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--T", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=40)
    ap.add_argument("--hidden", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    data = out / "data"
    seed = str(args.seed)
    steps = [
        ["generate", "--n", str(args.n), "--T", str(args.T), "--seed", seed, "--out", str(data)],
        ["label", "--data", str(data)],
        ["train", "--data", str(data), "--epochs", str(args.epochs), "--hidden", str(args.hidden),
         "--lr", "0.01", "--seed", seed, "--out", str(out)],
        ["compare", "--data", str(data), "--model", str(out / "model.json"), "--seed", seed,
         "--workers", str(args.workers), "--out", str(out / "comparison.csv")],
        ["report", "--comparison", str(out / "comparison.csv"), "--out", str(out / "summary.json")],
    ]
    for argv in steps:
        print("$ dynim " + " ".join(argv), flush=True)
        rc = cli(argv)
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
