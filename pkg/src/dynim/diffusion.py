"""Independent Cascade and Linear Threshold diffusion.

``simulate_*_once`` run a single cascade with a caller-supplied generator.
``estimate_spread`` runs ``mc`` cascades at once: iteration ``i`` reads its
coin flips (IC, one per arc) or thresholds (LT, one per node) from a keyed
stream indexed by ``(seed, i)``, so results do not depend on evaluation
order, and two seed sets evaluated under one config share random numbers.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .graph import GraphInputError, Snapshot
from .seeding import derive_seed, keyed_uniform


@dataclass(frozen=True)
class DiffusionConfig:
    model: str = "IC"
    p: float = 0.1
    mc: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("IC", "LT"):
            raise ValueError(f"unknown diffusion model {self.model!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.mc < 1:
            raise ValueError("mc must be >= 1")


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std: float
    mc: int
    seed: int


def _check_seeds(s: Snapshot, seeds: Iterable[int]) -> np.ndarray:
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if arr.size and (arr.min() < 0 or arr.max() >= s.num_nodes or not s.present[arr].all()):
        bad = [int(v) for v in arr if v < 0 or v >= s.num_nodes or not s.present[v]]
        raise GraphInputError(f"seed nodes not present in snapshot: {bad}")
    return arr


def simulate_ic_once(s: Snapshot, seeds: Iterable[int], p: float, rng: np.random.Generator) -> int:
    seeds = _check_seeds(s, seeds)
    active = np.zeros(s.num_nodes, dtype=bool)
    active[seeds] = True
    frontier = deque(seeds.tolist())
    count = len(frontier)
    while frontier:
        u = frontier.popleft()
        for v in s.neighbors(u).tolist():
            if not active[v] and rng.random() < p:
                active[v] = True
                frontier.append(v)
                count += 1
    return count


def _lt_weights(s: Snapshot) -> sp.csr_matrix:
    """W[u, v] = 1 / in_degree(v) for every arc u -> v."""
    src, dst = s.arcs()
    indeg = np.bincount(dst, minlength=s.num_nodes).astype(np.float64)
    w = 1.0 / indeg[dst] if dst.size else np.zeros(0)
    return sp.csr_matrix((w, (src, dst)), shape=(s.num_nodes, s.num_nodes))


def simulate_lt_once(s: Snapshot, seeds: Iterable[int], rng: np.random.Generator) -> int:
    seeds = _check_seeds(s, seeds)
    theta = 1.0 - rng.random(s.num_nodes)  # (0, 1]
    W = _lt_weights(s)
    active = np.zeros(s.num_nodes, dtype=bool)
    active[seeds] = True
    while True:
        pressure = W.T @ active.astype(np.float64)
        new = (pressure >= theta) & ~active
        if not new.any():
            return int(active.sum())
        active |= new


class SpreadSampler:
    """Batched spread evaluation for one snapshot under one config.

    The random realisations are drawn once at construction; every call to
    :meth:`totals` evaluates a seed set against all ``mc`` of them.
    """

    def __init__(self, s: Snapshot, cfg: DiffusionConfig):
        self.snapshot = s
        self.cfg = cfg
        n, mc = s.num_nodes, cfg.mc
        self.evaluations = 0
        src, dst = s.arcs()
        if cfg.model == "IC":
            coins = keyed_uniform(derive_seed(cfg.seed, "ic"), mc, src.size)
            it, a = np.nonzero(coins < cfg.p)
            # block-diagonal live-edge graph over (iteration, node) pairs
            rows = it * n + dst[a]
            cols = it * n + src[a]
            self._prop = sp.csr_matrix(
                (np.ones(rows.size, dtype=np.float32), (rows, cols)), shape=(mc * n, mc * n)
            )
        else:
            self._theta = keyed_uniform(derive_seed(cfg.seed, "lt"), mc, n, open_low=True)
            self._WT = _lt_weights(s).T.tocsr()

    def counts(self, seeds: Iterable[int]) -> np.ndarray:
        """Activated-node count for each of the ``mc`` realisations."""
        s, mc = self.snapshot, self.cfg.mc
        seeds = _check_seeds(s, seeds)
        self.evaluations += 1
        if seeds.size == 0:
            return np.zeros(mc, dtype=np.int64)
        if self.cfg.model == "IC":
            return self._ic_counts(seeds)
        return self._lt_counts(seeds)

    def _ic_counts(self, seeds: np.ndarray) -> np.ndarray:
        n, mc = self.snapshot.num_nodes, self.cfg.mc
        active = np.zeros(mc * n, dtype=bool)
        idx = (np.arange(mc)[:, None] * n + seeds[None, :]).ravel()
        active[idx] = True
        frontier = active.astype(np.float32)
        while True:
            hit = (self._prop @ frontier) > 0
            new = hit & ~active
            if not new.any():
                break
            active |= new
            frontier = new.astype(np.float32)
        return active.reshape(mc, n).sum(axis=1)

    def _lt_counts(self, seeds: np.ndarray) -> np.ndarray:
        n, mc = self.snapshot.num_nodes, self.cfg.mc
        active = np.zeros((mc, n), dtype=bool)
        active[:, seeds] = True
        while True:
            pressure = (self._WT @ active.T.astype(np.float64)).T
            new = (pressure >= self._theta) & ~active
            if not new.any():
                return active.sum(axis=1)
            active |= new

    def total(self, seeds: Iterable[int]) -> int:
        return int(self.counts(seeds).sum())

    def estimate(self, seeds: Iterable[int]) -> SpreadEstimate:
        c = self.counts(seeds).astype(np.float64)
        std = float(c.std(ddof=1)) if c.size > 1 else 0.0
        return SpreadEstimate(float(c.sum()) / c.size, std, self.cfg.mc, self.cfg.seed)


def estimate_spread(s: Snapshot, seeds: Iterable[int], cfg: DiffusionConfig) -> SpreadEstimate:
    return SpreadSampler(s, cfg).estimate(seeds)


MAX_BRUTEFORCE_ARCS = 22


def _reach_count(n: int, adj: list[list[int]], seeds: list[int]) -> int:
    seen = [False] * n
    stack = list(seeds)
    for v in stack:
        seen[v] = True
    count = len(stack)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count


def exact_spread_bruteforce(s: Snapshot, seeds: Iterable[int], p: float) -> float:
    """Exact IC spread by summing over every live-arc subset."""
    seeds = _check_seeds(s, seeds).tolist()
    src, dst = s.arcs()
    m = src.size
    if m > MAX_BRUTEFORCE_ARCS:
        raise GraphInputError(f"{m} arcs is too many for enumeration (max {MAX_BRUTEFORCE_ARCS})")
    if not seeds:
        return 0.0
    arcs = list(zip(src.tolist(), dst.tolist()))
    terms = []
    for live in itertools.product((False, True), repeat=m):
        k = sum(live)
        weight = p**k * (1.0 - p) ** (m - k)
        if weight == 0.0:
            continue
        adj: list[list[int]] = [[] for _ in range(s.num_nodes)]
        for (u, v), on in zip(arcs, live):
            if on:
                adj[u].append(v)
        terms.append(weight * _reach_count(s.num_nodes, adj, seeds))
    return math.fsum(terms)


def standard_error(est: SpreadEstimate) -> float:
    return est.std / math.sqrt(est.mc)
