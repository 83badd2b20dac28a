#!/usr/bin/env python3
"""Desk-scale Barabasi-Albert benchmark.

Generates a dynamic BA dataset, labels it with IFC, trains the candidate
predictor and compares candidate greedy against full greedy on every
snapshot with a full input window. Everything lands in --out and the
summary is printed at the end.

    python scripts/benchmark_ba.py --out runs/ba --seed 42
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from dynim import experiment as ex
from dynim.diffusion import DiffusionConfig
from dynim.graph import write_snapshot_dir
from dynim.predictor import TrainConfig, train, write_train_log
from dynim.syngen import BA, EvolutionConfig, generate_dynamic


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/ba")
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--T", type=int, default=20)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--epochs", type=int, default=400)
    ap.add_argument("--hidden", type=int, default=128)
    ap.add_argument("--sage-dims", type=int, nargs="+", default=[32, 32])
    ap.add_argument("--lr", type=float, default=0.001)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--mc", type=int, default=100)
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tg = generate_dynamic(args.n, args.T, BA(args.m), EvolutionConfig(0.2, 0.6, args.seed))
    write_snapshot_dir(tg, out / "data")
    labelled = ex.label_snapshots(tg, 40.0)
    ex.write_labels(out / "data", tg, labelled)
    labels = ex.read_labels(out / "data", tg)

    cfg = TrainConfig(lr=args.lr, epochs=args.epochs, hidden=args.hidden,
                      sage_dims=tuple(args.sage_dims), seed=args.seed)
    t0 = time.perf_counter()
    model, history = train(tg, labels, cfg, log=lambda e, l, a: print(f"epoch {e:4d} loss {l:.4f} acc {a:.4f}", flush=True)
                           if e % 25 == 0 else None)
    train_s = time.perf_counter() - t0
    model.save(out / "model.json")
    write_train_log(out / "train_log.csv", history)
    print(f"best test accuracy {history['best_test_accuracy']:.4f} ({train_s:.0f}s)")

    rows = ex.compare(tg, model, args.k, DiffusionConfig("IC", args.p, args.mc, args.seed),
                      workers=args.workers, data_dir=out / "data", model_path=out / "model.json")
    ex.write_comparison_csv(out / "comparison.csv", rows)
    ex.write_comparison_seeds(out / "comparison.seeds.csv", rows)
    summary = ex.summarize(rows)
    summary["test_accuracy"] = history["best_test_accuracy"]
    summary["train_seconds"] = train_s
    ex.write_summary_json(out / "summary.json", summary)
    print(ex.format_report(summary))
    print(json.dumps({k: summary[k] for k in ("test_accuracy", "spread_ratio", "speedup_small")}))


if __name__ == "__main__":
    main()
