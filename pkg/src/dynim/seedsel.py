"""Greedy seed selection restricted to a candidate set.

Gains are computed from integer activation totals over one shared set of
random realisations, which makes the spread estimate a fixed monotone
function of the seed set. Ties go to the smallest node id.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

from .diffusion import DiffusionConfig, SpreadSampler, estimate_spread
from .graph import GraphInputError, Snapshot


@dataclass
class SeedSet:
    nodes: list[int]
    gains: list[float]
    k: int
    evaluations: int = 0
    meta: dict = field(default_factory=dict)


def marginal_gain(s: Snapshot, S: Iterable[int], u: int, cfg: DiffusionConfig) -> float:
    S = list(S)
    if u in S:
        raise GraphInputError(f"node {u} is already in the seed set")
    sampler = SpreadSampler(s, cfg)
    return (sampler.total(S + [u]) - sampler.total(S)) / cfg.mc


def _candidates(s: Snapshot, candidates: Iterable[int] | None) -> list[int]:
    if candidates is None:
        return s.present_nodes().tolist()
    cand = sorted({int(c) for c in candidates})
    if not cand:
        raise GraphInputError("empty candidate set")
    bad = [c for c in cand if c < 0 or c >= s.num_nodes or not s.present[c]]
    if bad:
        raise GraphInputError(f"candidates not present in snapshot: {bad[:10]}")
    return cand


def greedy_select(
    s: Snapshot, candidates: Iterable[int] | None, k: int, cfg: DiffusionConfig
) -> SeedSet:
    """Plain greedy over ``candidates`` (all present nodes when None)."""
    if k < 1:
        raise GraphInputError("k must be >= 1")
    cand = _candidates(s, candidates)
    if not cand:
        raise GraphInputError("empty candidate set")
    sampler = SpreadSampler(s, cfg)
    chosen: list[int] = []
    gains: list[float] = []
    remaining = list(cand)
    base = 0
    while remaining and len(chosen) < k:
        best_u, best_total = -1, -1
        for u in remaining:
            tot = sampler.total(chosen + [u])
            if tot > best_total:
                best_u, best_total = u, tot
        chosen.append(best_u)
        gains.append((best_total - base) / cfg.mc)
        base = best_total
        remaining.remove(best_u)
    return SeedSet(chosen, gains, k, sampler.evaluations)


def lazy_greedy_select(
    s: Snapshot, candidates: Iterable[int] | None, k: int, cfg: DiffusionConfig
) -> SeedSet:
    """Lazy-evaluation greedy; returns the same seeds as :func:`greedy_select`.

    Stale gains stay valid upper bounds only when the spread estimate is
    submodular, which holds for IC realisations but not for LT thresholds;
    LT therefore falls back to the eager loop.
    """
    if cfg.model != "IC":
        return greedy_select(s, candidates, k, cfg)
    if k < 1:
        raise GraphInputError("k must be >= 1")
    cand = _candidates(s, candidates)
    if not cand:
        raise GraphInputError("empty candidate set")
    sampler = SpreadSampler(s, cfg)
    # entries: (-gain_total, node, round in which the gain was computed)
    heap = [(-sampler.total([u]), u, 0) for u in cand]
    heapq.heapify(heap)
    chosen: list[int] = []
    gains: list[float] = []
    base = 0
    while heap and len(chosen) < k:
        neg, u, rnd = heapq.heappop(heap)
        if rnd == len(chosen):
            chosen.append(u)
            gains.append(-neg / cfg.mc)
            base += -neg
            continue
        g = sampler.total(chosen + [u]) - base
        heapq.heappush(heap, (-g, u, len(chosen)))
    return SeedSet(chosen, gains, k, sampler.evaluations)


def seed_spread(s: Snapshot, seeds: SeedSet, cfg: DiffusionConfig):
    return estimate_spread(s, seeds.nodes, cfg)


def write_seed_csv(path, rows: Iterable[tuple[int, SeedSet]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("snapshot,rank,node,gain\n")
        for t, ss in rows:
            for r, (v, g) in enumerate(zip(ss.nodes, ss.gains), start=1):
                fh.write(f"{t},{r},{v},{float(g)!r}\n")

