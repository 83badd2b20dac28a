"""Influence Capacity scores, k-shell coreness and percentile labels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .graph import GraphInputError, Snapshot, undirected_projection


@dataclass(frozen=True)
class IfcScores:
    local: np.ndarray
    global_: np.ndarray
    combined: np.ndarray
    coreness: np.ndarray
    present: np.ndarray


@dataclass(frozen=True)
class LabelSet:
    labels: np.ndarray
    alpha: float
    threshold_value: float


def _require_undirected(s: Snapshot) -> None:
    if s.directed:
        raise GraphInputError("expected an undirected snapshot; apply undirected_projection first")


def kshell_coreness(s: Snapshot) -> np.ndarray:
    """Coreness of every node by bucket-ordered peeling (Batagelj-Zaversnik)."""
    _require_undirected(s)
    n = s.num_nodes
    deg = s.out_degrees().astype(np.int64)
    if n == 0:
        return deg
    indptr, indices = s.indptr, s.indices
    order = np.argsort(deg, kind="stable")
    maxd = int(deg.max())
    # bin_start[d] = first position in `order` holding degree d
    counts = np.bincount(deg, minlength=maxd + 1)
    bin_start = np.concatenate([[0], np.cumsum(counts)[:-1]]).tolist()
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    deg = deg.tolist()
    order = order.tolist()
    pos = pos.tolist()
    for i in range(n):
        v = order[i]
        for u in indices[indptr[v]:indptr[v + 1]].tolist():
            if deg[u] > deg[v]:
                du = deg[u]
                pu, pw = pos[u], bin_start[du]
                w = order[pw]
                if u != w:
                    order[pu], order[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_start[du] += 1
                deg[u] -= 1
    return np.asarray(deg, dtype=np.int64)


def local_influence(s: Snapshot, weights: Mapping[tuple[int, int], float] | None = None) -> np.ndarray:
    """Two-hop local influence of every node.

    Unweighted: ``1 + deg(x) + sum_{y in N(x)} deg_{G - x}(y)``.
    Weighted: ``1 + sum_y w(x,y) + sum_y sum_{z in N(y)} w(x,y) w(y,z)``,
    where the inner sum runs over the full neighbourhood of ``y``.
    """
    _require_undirected(s)
    deg = s.out_degrees().astype(np.float64)
    A = s.adjacency_matrix()
    if weights is None:
        # simple graph: removing x lowers each neighbour's degree by one
        return 1.0 + deg + (A @ deg - deg)
    src, dst = s.arcs()
    w = np.empty(src.size, dtype=np.float64)
    for i, (u, v) in enumerate(zip(src.tolist(), dst.tolist())):
        val = weights.get((u, v), weights.get((v, u)))
        if val is None:
            raise GraphInputError(f"missing weight for edge ({u}, {v})")
        if not 0.0 <= val <= 1.0:
            raise GraphInputError(f"weight of edge ({u}, {v}) outside [0, 1]")
        w[i] = val
    W = A.copy()
    W.data = w
    strength = np.asarray(W.sum(axis=1)).ravel()
    return 1.0 + strength + W @ strength


def global_influence(s: Snapshot, coreness: np.ndarray) -> np.ndarray:
    deg = s.out_degrees().astype(np.float64)
    dmax = deg.max() if deg.size else 0.0
    if dmax == 0:
        return np.zeros_like(deg)
    return coreness * (1.0 + deg / dmax)


def ifc_scores(s: Snapshot, weights: Mapping[tuple[int, int], float] | None = None) -> IfcScores:
    """Local, global and combined influence capacity.

    Directed snapshots are scored on their undirected projection. Maxima
    are taken over present nodes; absent nodes get a combined score of 0.
    """
    u = undirected_projection(s)
    core = kshell_coreness(u)
    loc = local_influence(u, weights)
    glo = global_influence(u, core)
    present = u.present.copy()
    combined = np.zeros(u.num_nodes)
    if present.any():
        lmax = loc[present].max()
        gmax = glo[present].max()
        if lmax > 0 and gmax > 0:
            combined[present] = (loc[present] / lmax) * (glo[present] / gmax)
    return IfcScores(loc, glo, combined, core, present)


def nearest_rank_threshold(values: np.ndarray, alpha: float) -> float:
    """Nearest-rank (100 - alpha)-th percentile of ``values``."""
    n = len(values)
    q = (100 - Fraction(str(alpha))) / 100
    rank = max(1, math.ceil(q * n))
    return float(np.sort(values)[rank - 1])


def label_candidates(scores: IfcScores, alpha: float) -> LabelSet:
    """Label present nodes at or above the nearest-rank cutoff as candidates."""
    if not 0 < alpha <= 100:
        raise GraphInputError(f"alpha must lie in (0, 100], got {alpha}")
    present = scores.present
    if not present.any():
        raise GraphInputError("no present nodes to label")
    thr = nearest_rank_threshold(scores.combined[present], alpha)
    labels = (present & (scores.combined >= thr)).astype(np.int8)
    return LabelSet(labels, float(alpha), thr)


def write_labels_csv(path, scores: IfcScores | None, labels: LabelSet | None, num_nodes: int) -> None:
    """``node,local,global,combined,coreness,label``; header only when there is nothing to label."""
    with open(path, "w", newline="\n") as fh:
        fh.write("node,local,global,combined,coreness,label\n")
        if scores is None or labels is None:
            return
        for v in range(num_nodes):
            fh.write(
                f"{v},{float(scores.local[v])!r},{float(scores.global_[v])!r},{float(scores.combined[v])!r},"
                f"{int(scores.coreness[v])},{int(labels.labels[v])}\n"
            )


def read_labels_csv(path, num_nodes: int) -> np.ndarray:
    """Binary label vector from a labels CSV; nodes missing from the file are 0."""
    out = np.zeros(num_nodes, dtype=np.int8)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:1] != ["node"] or "label" not in header:
            raise GraphInputError(f"{path}: not a labels file")
        col = header.index("label")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != len(header):
                raise GraphInputError(f"{path}: malformed row {line!r}")
            out[int(parts[0])] = int(parts[col])
    return out
