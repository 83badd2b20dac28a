"""Seeded synthetic graphs and snapshot evolution with edge churn."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphInputError, Snapshot, TemporalGraph, build_snapshot
from .seeding import derive_seed


@dataclass(frozen=True)
class EvolutionConfig:
    p_add: float = 0.2
    p_del: float = 0.6
    seed: int = 0

    def __post_init__(self):
        for name in ("p_add", "p_del"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise GraphInputError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class BA:
    m: int


@dataclass(frozen=True)
class ER:
    p: float


def generate_ba(n: int, m: int, seed: int) -> Snapshot:
    """Barabasi-Albert graph grown from ``m`` isolated core nodes.

    Each later node attaches to ``m`` distinct targets drawn from the
    repeated-node list, so the graph has exactly ``m * (n - m)`` edges.
    """
    if not 1 <= m < n:
        raise GraphInputError(f"BA needs 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(derive_seed(seed, "ba", n, m))
    edges = []
    repeated: list[int] = []
    targets = list(range(m))
    for v in range(m, n):
        edges.extend((v, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([v] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[rng.integers(len(repeated))])
        targets = sorted(chosen)
    return build_snapshot(edges, n, directed=False)


def generate_er(n: int, p: float, seed: int) -> Snapshot:
    if not 0.0 <= p <= 1.0:
        raise GraphInputError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(derive_seed(seed, "er", n))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return build_snapshot(np.stack([iu[keep], ju[keep]], axis=1), n, directed=False)


def evolve(s: Snapshot, cfg: EvolutionConfig) -> Snapshot:
    """One churn step on an undirected snapshot.

    Every edge is deleted independently with probability ``p_del``. Then
    every node, with probability ``p_add``, gains one edge to a node drawn
    uniformly from its non-neighbours in ``s`` (excluding edges added earlier
    in the same step). Nodes without any available partner are skipped.
    """
    if s.directed:
        raise GraphInputError("evolve works on undirected snapshots")
    rng = np.random.default_rng(derive_seed(cfg.seed, "evolve"))
    edges = np.asarray(s.edge_list(), dtype=np.int64).reshape(-1, 2)
    survive = rng.random(len(edges)) >= cfg.p_del
    kept = edges[survive]

    n = s.num_nodes
    spawn = np.flatnonzero(rng.random(n) < cfg.p_add)
    added: list[tuple[int, int]] = []
    if spawn.size:
        taken = [set(s.neighbors(v).tolist()) for v in range(n)]
        for v in spawn.tolist():
            free = n - 1 - len(taken[v])
            if free <= 0:
                continue
            # rejection sampling is fine on the sparse graphs this targets
            if free * 4 >= n:
                while True:
                    u = int(rng.integers(n))
                    if u != v and u not in taken[v]:
                        break
            else:
                pool = np.setdiff1d(np.arange(n), np.fromiter(taken[v] | {v}, dtype=np.int64))
                u = int(pool[rng.integers(pool.size)])
            taken[v].add(u)
            taken[u].add(v)
            added.append((v, u))
    all_edges = np.concatenate([kept, np.asarray(added, dtype=np.int64).reshape(-1, 2)])
    return build_snapshot(all_edges, n, directed=False)


def generate_dynamic(n: int, T: int, model: BA | ER, cfg: EvolutionConfig) -> TemporalGraph:
    if T < 1:
        raise GraphInputError("T must be >= 1")
    if isinstance(model, BA):
        base = generate_ba(n, model.m, cfg.seed)
        info = {"kind": "synthetic", "model": "ba", "m": model.m}
    elif isinstance(model, ER):
        base = generate_er(n, model.p, cfg.seed)
        info = {"kind": "synthetic", "model": "er", "p": model.p}
    else:
        raise GraphInputError(f"unknown generator {model!r}")
    info.update(n=n, T=T, p_add=cfg.p_add, p_del=cfg.p_del, seed=cfg.seed)
    snaps = [base]
    for t in range(1, T):
        step = EvolutionConfig(cfg.p_add, cfg.p_del, derive_seed(cfg.seed, "step", t))
        snaps.append(evolve(snaps[-1], step))
    return TemporalGraph(tuple(snaps), tuple(str(i) for i in range(n)), info)
