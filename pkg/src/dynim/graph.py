"""Snapshot and temporal-graph data model.

A ``Snapshot`` stores CSR out-adjacency over a fixed node universe of size
``num_nodes``. Node ids are dense integers; external labels live on the
owning ``TemporalGraph``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class GraphInputError(ValueError):
    """Malformed graph input (bad edge, bad line, empty stream)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Snapshot:
    directed: bool
    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    present: np.ndarray

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_arcs(self) -> int:
        return int(self.indices.size)

    @property
    def num_edges(self) -> int:
        """Arc count for directed snapshots, undirected edge count otherwise."""
        return self.num_arcs if self.directed else self.num_arcs // 2

    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.out_degrees())
        return src, self.indices.astype(np.int64)

    def edge_list(self) -> list[tuple[int, int]]:
        """Arcs for directed snapshots, ``u < v`` pairs for undirected ones."""
        src, dst = self.arcs()
        if not self.directed:
            keep = src < dst
            src, dst = src[keep], dst[keep]
        return list(zip(src.tolist(), dst.tolist()))

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes))

    def present_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.present)

    def same_structure(self, other: "Snapshot") -> bool:
        return (
            self.directed == other.directed
            and self.num_nodes == other.num_nodes
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.present, other.present)
        )


def build_snapshot(
    edges: Iterable[tuple[int, int]] | np.ndarray,
    num_nodes: int,
    directed: bool,
    present: Sequence[int] | None = None,
) -> Snapshot:
    """Build a snapshot, dropping self-loops and duplicate edges.

    ``present`` lists nodes that count as active even without incident
    edges; nodes with at least one incident edge are always present.
    """
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphInputError("edges must be (src, dst) pairs")
    bad = np.flatnonzero((arr < 0).any(axis=1) | (arr >= num_nodes).any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise GraphInputError(f"edge {i} {tuple(arr[i].tolist())} has endpoint outside 0..{num_nodes - 1}")
    arr = arr[arr[:, 0] != arr[:, 1]]
    if not directed:
        arr = np.concatenate([arr, arr[:, ::-1]])
    if arr.size:
        arr = np.unique(arr, axis=0)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(indptr, arr[:, 0] + 1, 1)
    np.cumsum(indptr, out=indptr)
    indices = arr[:, 1].astype(np.int32)
    mask = np.zeros(num_nodes, dtype=bool)
    mask[arr[:, 0]] = True
    mask[arr[:, 1]] = True
    if present is not None:
        extra = np.asarray(list(present), dtype=np.int64)
        if extra.size and (extra.min() < 0 or extra.max() >= num_nodes):
            raise GraphInputError("present node outside the node universe")
        mask[extra] = True
    return Snapshot(directed, int(num_nodes), _frozen(indptr), _frozen(indices), _frozen(mask))


def undirected_projection(s: Snapshot) -> Snapshot:
    if not s.directed:
        return s
    src, dst = s.arcs()
    edges = np.stack([src, dst], axis=1)
    return build_snapshot(edges, s.num_nodes, directed=False, present=s.present_nodes())


def degree(s: Snapshot, v: int) -> int:
    return int(undirected_projection(s).out_degrees()[v])


def avg_neighbor_degree(s: Snapshot, v: int) -> float:
    return float(neighbor_degree_means(s)[v])


def neighbor_degree_means(s: Snapshot) -> np.ndarray:
    """Mean neighbor degree for every node (0 for isolated nodes)."""
    u = undirected_projection(s)
    deg = u.out_degrees().astype(np.float64)
    sums = u.adjacency_matrix() @ deg
    out = np.zeros_like(deg)
    np.divide(sums, deg, out=out, where=deg > 0)
    return out


@dataclass(frozen=True)
class GraphStats:
    nodes_present: int
    edges: int
    scc_count: int | None
    wcc_count: int
    max_degree: int


def snapshot_stats(s: Snapshot) -> GraphStats:
    present = s.present_nodes()
    sub = s.adjacency_matrix()[present][:, present]
    wcc = connected_components(sub, directed=True, connection="weak", return_labels=False) if present.size else 0
    scc = None
    if s.directed:
        scc = connected_components(sub, directed=True, connection="strong", return_labels=False) if present.size else 0
    u = undirected_projection(s)
    max_deg = int(u.out_degrees().max()) if s.num_nodes else 0
    return GraphStats(int(present.size), s.num_edges, None if scc is None else int(scc), int(wcc), max_deg)


def scc_count(s: Snapshot) -> int:
    """SCC count treating undirected snapshots as bidirected."""
    present = s.present_nodes()
    if not present.size:
        return 0
    sub = s.adjacency_matrix()[present][:, present]
    return int(connected_components(sub, directed=True, connection="strong", return_labels=False))


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    snapshots: tuple[Snapshot, ...]
    labels: tuple[str, ...]
    bin_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.snapshots:
            raise GraphInputError("a temporal graph needs at least one snapshot")
        sizes = {s.num_nodes for s in self.snapshots}
        if sizes != {len(self.labels)}:
            raise GraphInputError("all snapshots must share the node universe")

    @property
    def T(self) -> int:
        return len(self.snapshots)

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    @property
    def directed(self) -> bool:
        return self.snapshots[0].directed

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, t: int) -> Snapshot:
        return self.snapshots[t]


def ingest_temporal_edgelist(
    lines: Iterable[str], bin_width: int, directed: bool = True
) -> TemporalGraph:
    """Bin a ``src dst timestamp`` stream into snapshots.

    Bin t holds edges with ``floor((ts - ts_min) / bin_width) == t``. Interior
    empty bins become edgeless snapshots. Node ids follow first appearance.
    """
    if bin_width <= 0:
        raise GraphInputError("bin_width must be positive")
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphInputError(f"line {lineno}: expected 'src dst timestamp', got {line!r}")
        try:
            ts = int(parts[2])
        except ValueError:
            raise GraphInputError(f"line {lineno}: timestamp {parts[2]!r} is not an integer") from None
        if ts < 0:
            raise GraphInputError(f"line {lineno}: negative timestamp")
        records.append((parts[0], parts[1], ts))
    if not records:
        raise GraphInputError("empty edge stream")

    ids: dict[str, int] = {}
    for a, b, _ in records:
        ids.setdefault(a, len(ids))
        ids.setdefault(b, len(ids))
    t0 = min(r[2] for r in records)
    bins = [(r[2] - t0) // bin_width for r in records]
    T = max(bins) + 1
    per_bin: list[list[tuple[int, int]]] = [[] for _ in range(T)]
    for (a, b, _), t in zip(records, bins):
        per_bin[t].append((ids[a], ids[b]))
    n = len(ids)
    snaps = tuple(build_snapshot(e, n, directed) for e in per_bin)
    return TemporalGraph(snaps, tuple(ids), {"kind": "binned", "bin_width": bin_width, "origin": t0})


# snapshot directory format

MANIFEST = "manifest.json"


def write_snapshot_dir(tg: TemporalGraph, out: str | os.PathLike) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    isolated = {}
    for t, s in enumerate(tg.snapshots):
        deg = np.diff(s.indptr)
        touched = np.zeros(s.num_nodes, dtype=bool)
        touched[deg > 0] = True
        touched[s.indices] = True
        extra = np.flatnonzero(s.present & ~touched)
        if extra.size:
            isolated[str(t)] = extra.tolist()
        with open(out / f"snapshot_{t:04d}.edges", "w", newline="\n") as fh:
            fh.writelines(f"{u} {v}\n" for u, v in s.edge_list())
    manifest = {
        "format_version": 1,
        "U": tg.num_nodes,
        "T": tg.T,
        "directed": tg.directed,
        "labels": list(tg.labels),
        "bin_spec": tg.bin_spec,
        "isolated_present": isolated,
    }
    with open(out / MANIFEST, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return out


def read_snapshot_dir(path: str | os.PathLike) -> TemporalGraph:
    path = Path(path)
    mf = path / MANIFEST
    if not mf.exists():
        raise GraphInputError(f"{path} has no {MANIFEST}")
    manifest = json.loads(mf.read_text())
    n, T, directed = manifest["U"], manifest["T"], manifest["directed"]
    iso = manifest.get("isolated_present", {})
    snaps = []
    for t in range(T):
        f = path / f"snapshot_{t:04d}.edges"
        if not f.exists():
            raise GraphInputError(f"missing {f.name}")
        data = np.loadtxt(f, dtype=np.int64, ndmin=2) if f.stat().st_size else np.zeros((0, 2), np.int64)
        snaps.append(build_snapshot(data.reshape(-1, 2), n, directed, present=iso.get(str(t))))
    return TemporalGraph(tuple(snaps), tuple(manifest["labels"]), manifest.get("bin_spec", {}))
