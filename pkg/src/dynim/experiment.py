"""Experiment orchestration: labelling, greedy-vs-candidate comparison, reports."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diffusion import DiffusionConfig, estimate_spread
from .graph import GraphInputError, TemporalGraph
from .ifc import IfcScores, LabelSet, ifc_scores, label_candidates, read_labels_csv, write_labels_csv
from .predictor import PredictorModel, TrainConfig, predict_candidates
from .seeding import derive_seed
from .seedsel import SeedSet, greedy_select, lazy_greedy_select

COMPARISON_HEADER = ["snapshot", "method", "k", "spread_mean", "spread_std", "wall_time_ms", "candidates", "nodes", "edges"]


@dataclass
class ExperimentConfig:
    data: str
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    k: int = 5
    alpha: float = 40.0
    train: TrainConfig = field(default_factory=TrainConfig)
    out: str = "out"
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise GraphInputError("k must be >= 1")


def label_snapshots(
    tg: TemporalGraph, alpha: float, weight: float | None = None
) -> list[tuple[IfcScores, LabelSet] | None]:
    """IFC scores and labels per snapshot; None where nothing is present.

    ``weight`` switches to the weighted local term with every edge carrying
    that weight (typically the IC probability).
    """
    out = []
    for s in tg.snapshots:
        if not s.present.any():
            out.append(None)
            continue
        weights = None
        if weight is not None:
            weights = {e: weight for e in s.edge_list()}
        sc = ifc_scores(s, weights)
        out.append((sc, label_candidates(sc, alpha)))
    return out


def write_labels(out_dir, tg: TemporalGraph, labelled) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t, item in enumerate(labelled):
        p = out_dir / f"labels_{t:04d}.csv"
        write_labels_csv(p, *(item if item else (None, None)), tg.num_nodes)
        paths.append(p)
    return paths


def read_labels(label_dir, tg: TemporalGraph) -> list[np.ndarray]:
    label_dir = Path(label_dir)
    out = []
    for t in range(tg.T):
        p = label_dir / f"labels_{t:04d}.csv"
        if not p.exists():
            raise FileNotFoundError(f"missing labels file {p}")
        out.append(read_labels_csv(p, tg.num_nodes))
    return out


def snapshot_diffusion(cfg: DiffusionConfig, t: int) -> DiffusionConfig:
    """Per-snapshot diffusion config; both comparison arms use the same one."""
    return DiffusionConfig(cfg.model, cfg.p, cfg.mc, derive_seed(cfg.seed, "snapshot", t))


def _window(model: PredictorModel, tg: TemporalGraph, t: int):
    return [tg[j] for j in model.input_steps(t)]


def _select(s, cand, k, cfg, lazy):
    fn = lazy_greedy_select if lazy else greedy_select
    t0 = time.perf_counter()
    seeds = fn(s, cand, k, cfg)
    return seeds, (time.perf_counter() - t0) * 1000.0


def compare_snapshot(
    tg: TemporalGraph,
    model: PredictorModel,
    t: int,
    k: int,
    cfg: DiffusionConfig,
    lazy: bool = False,
    time_inference: bool = False,
) -> list[dict]:
    s = tg[t]
    dcfg = snapshot_diffusion(cfg, t)
    n_present = int(s.present.sum())
    base = {"snapshot": t, "k": k, "nodes": n_present, "edges": s.num_edges}
    rows = []
    if n_present == 0:
        for method in ("full_greedy", "candidate_greedy"):
            rows.append(dict(base, method=method, spread_mean=0.0, spread_std=0.0, wall_time_ms=0.0, candidates=0))
        return rows

    full, full_ms = _select(s, None, k, dcfg, lazy)
    est = estimate_spread(s, full.nodes, dcfg)
    rows.append(dict(base, method="full_greedy", spread_mean=est.mean, spread_std=est.std,
                     wall_time_ms=full_ms, candidates=n_present))

    t0 = time.perf_counter()
    pred = predict_candidates(model, _window(model, tg, t), present=s.present, snapshot=t)
    infer_ms = (time.perf_counter() - t0) * 1000.0
    cand = pred.candidates.tolist()
    if cand:
        chosen, cand_ms = _select(s, cand, k, dcfg, lazy)
        est = estimate_spread(s, chosen.nodes, dcfg)
        mean, std = est.mean, est.std
    else:
        chosen, cand_ms, mean, std = SeedSet([], [], k), 0.0, 0.0, 0.0
    rows.append(dict(base, method="candidate_greedy", spread_mean=mean, spread_std=std,
                     wall_time_ms=cand_ms, candidates=len(cand)))
    rows[0]["seeds"], rows[1]["seeds"] = full.nodes, chosen.nodes
    if time_inference:
        rows[0]["inference_ms"] = 0.0
        rows[1]["inference_ms"] = infer_ms
    return rows


def _compare_job(args):
    data_dir, model_path, t, k, cfg, lazy, time_inference = args
    from .graph import read_snapshot_dir

    return compare_snapshot(read_snapshot_dir(data_dir), PredictorModel.load(model_path), t, k, cfg, lazy, time_inference)


def compare(
    tg: TemporalGraph,
    model: PredictorModel,
    k: int,
    cfg: DiffusionConfig,
    lazy: bool = False,
    time_inference: bool = False,
    workers: int = 1,
    data_dir=None,
    model_path=None,
) -> list[dict]:
    """Full greedy vs candidate greedy on every snapshot ``t >= d``.

    With ``workers > 1`` snapshots are processed in separate processes,
    which reload the dataset and model from ``data_dir`` / ``model_path``.
    Rows come back sorted by (snapshot, method) either way.
    """
    steps = list(range(model.d, tg.T))
    rows: list[dict] = []
    if workers > 1:
        if data_dir is None or model_path is None:
            raise ValueError("parallel comparison needs data_dir and model_path")
        jobs = [(str(data_dir), str(model_path), t, k, cfg, lazy, time_inference) for t in steps]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r in pool.map(_compare_job, jobs):
                rows.extend(r)
    else:
        for t in steps:
            rows.extend(compare_snapshot(tg, model, t, k, cfg, lazy, time_inference))
    rows.sort(key=lambda r: (r["snapshot"], r["method"]))
    return rows


def write_comparison_csv(path, rows: list[dict], time_inference: bool = False) -> None:
    header = COMPARISON_HEADER + (["inference_ms"] if time_inference else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])


def write_comparison_seeds(path, rows: list[dict]) -> None:
    """Companion ``snapshot,method,rank,node`` listing of the chosen seeds."""
    with open(path, "w", newline="\n") as fh:
        fh.write("snapshot,method,rank,node\n")
        for r in rows:
            for rank, v in enumerate(r.get("seeds", []), start=1):
                fh.write(f"{r['snapshot']},{r['method']},{rank},{v}\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_comparison_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(h not in reader.fieldnames for h in COMPARISON_HEADER):
            raise GraphInputError(f"{path}: missing comparison header")
        rows = []
        for line in reader:
            try:
                rows.append({
                    "snapshot": int(line["snapshot"]),
                    "method": line["method"],
                    "k": int(line["k"]),
                    "spread_mean": float(line["spread_mean"]),
                    "spread_std": float(line["spread_std"]),
                    "wall_time_ms": float(line["wall_time_ms"]),
                    "candidates": int(line["candidates"]),
                    "nodes": int(line["nodes"]),
                    "edges": int(line["edges"]),
                })
            except (TypeError, ValueError) as exc:
                raise GraphInputError(f"{path}: malformed row {line}") from exc
    if not rows:
        raise GraphInputError(f"{path}: no comparison rows")
    return rows


def summarize(rows: list[dict], small_fraction: float = 0.5) -> dict:
    """Spread ratio and speedup of the candidate arm relative to full greedy.

    Snapshots where full greedy has zero spread or either arm is missing are
    skipped. ``speedup_small`` restricts to snapshots whose candidate set is
    at most ``small_fraction`` of the present nodes.
    """
    by_snap: dict[int, dict[str, dict]] = {}
    for r in rows:
        by_snap.setdefault(r["snapshot"], {})[r["method"]] = r
    table = []
    for t in sorted(by_snap):
        arms = by_snap[t]
        if "full_greedy" not in arms or "candidate_greedy" not in arms:
            continue
        f, c = arms["full_greedy"], arms["candidate_greedy"]
        ratio = c["spread_mean"] / f["spread_mean"] if f["spread_mean"] > 0 else math.nan
        speedup = f["wall_time_ms"] / c["wall_time_ms"] if c["wall_time_ms"] > 0 else math.nan
        table.append({
            "snapshot": t,
            "full_spread": f["spread_mean"],
            "candidate_spread": c["spread_mean"],
            "spread_ratio": ratio,
            "full_ms": f["wall_time_ms"],
            "candidate_ms": c["wall_time_ms"],
            "speedup": speedup,
            "candidates": c["candidates"],
            "nodes": c["nodes"],
            "edges": c["edges"],
        })
    if not table:
        raise GraphInputError("no snapshot has both comparison arms")

    def mean(key, rows_):
        vals = [r[key] for r in rows_ if not math.isnan(r[key])]
        return float(np.mean(vals)) if vals else math.nan

    small = [r for r in table if r["candidates"] <= small_fraction * r["nodes"]]
    return {
        "snapshots": len(table),
        "spread_ratio": mean("spread_ratio", table),
        "speedup": mean("speedup", table),
        "speedup_small": mean("speedup", small),
        "small_snapshots": len(small),
        "mean_candidate_fraction": float(np.mean([r["candidates"] / max(1, r["nodes"]) for r in table])),
        "per_snapshot": table,
    }


def format_report(summary: dict) -> str:
    lines = [
        f"snapshots compared : {summary['snapshots']}",
        f"mean spread ratio  : {summary['spread_ratio']:.4f}  (candidate / full greedy)",
        f"mean speedup       : {summary['speedup']:.3f}x",
        f"speedup |C|<=|V|/2 : {summary['speedup_small']:.3f}x over {summary['small_snapshots']} snapshots",
        "",
        f"{'t':>4} {'nodes':>6} {'|C|':>5} {'full':>9} {'cand':>9} {'ratio':>6} {'full ms':>9} {'cand ms':>9} {'speedup':>7}",
    ]
    for r in summary["per_snapshot"]:
        lines.append(
            f"{r['snapshot']:>4} {r['nodes']:>6} {r['candidates']:>5} {r['full_spread']:>9.3f} "
            f"{r['candidate_spread']:>9.3f} {r['spread_ratio']:>6.3f} {r['full_ms']:>9.1f} "
            f"{r['candidate_ms']:>9.1f} {r['speedup']:>7.2f}"
        )
    return "\n".join(lines)


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")
