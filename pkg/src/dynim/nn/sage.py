"""GraphSAGE layer with mean aggregation.

``out_v = relu(W [h_v ; mean_{u in N(v)} h_u] + b)`` with a zero aggregate
for nodes without neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..graph import Snapshot, undirected_projection
from .dense import ShapeError, check_finite, uniform_init


@dataclass
class SageLayerParams:
    W: np.ndarray  # (out_dim, 2 * in_dim)
    bias: np.ndarray  # (out_dim,)

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator) -> "SageLayerParams":
        return cls(uniform_init(rng, (out_dim, 2 * in_dim), 2 * in_dim), uniform_init(rng, (out_dim,), 2 * in_dim))

    @property
    def in_dim(self) -> int:
        return self.W.shape[1] // 2

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]


def mean_aggregator(s: Snapshot, fanout: int | None = None, rng: np.random.Generator | None = None) -> sp.csr_matrix:
    """Row-stochastic neighbour-averaging matrix on the undirected projection.

    With ``fanout`` set, each node averages over at most ``fanout``
    neighbours sampled without replacement.
    """
    u = undirected_projection(s)
    n = u.num_nodes
    deg = u.out_degrees()
    if fanout is None or not (deg > fanout).any():
        src, dst = u.arcs()
        w = 1.0 / deg[src] if src.size else np.zeros(0)
        return sp.csr_matrix((w, (src, dst)), shape=(n, n))
    if rng is None:
        raise ValueError("neighbour sampling needs an rng")
    rows, cols, vals = [], [], []
    for v in range(n):
        nb = u.neighbors(v)
        if nb.size == 0:
            continue
        if nb.size > fanout:
            nb = np.sort(rng.choice(nb, size=fanout, replace=False))
        rows.extend([v] * nb.size)
        cols.extend(nb.tolist())
        vals.extend([1.0 / nb.size] * nb.size)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def sage_layer_forward(s: Snapshot | None, H: np.ndarray, params: SageLayerParams, agg: sp.csr_matrix | None = None):
    if agg is None:
        agg = mean_aggregator(s)
    if H.ndim != 2 or H.shape[0] != agg.shape[0] or H.shape[1] != params.in_dim:
        raise ShapeError(f"sage: H {H.shape} vs {agg.shape[0]} nodes, in_dim {params.in_dim}")
    check_finite("sage input", H)
    X = np.concatenate([H, agg @ H], axis=1)
    Z = X @ params.W.T + params.bias
    return np.maximum(Z, 0.0), (X, Z, agg, params)


def sage_layer_backward(grad_out: np.ndarray, cache):
    X, Z, agg, params = cache
    gZ = grad_out * (Z > 0)
    gW = gZ.T @ X
    gb = gZ.sum(axis=0)
    gX = gZ @ params.W
    d = params.in_dim
    gH = gX[:, :d] + agg.T @ gX[:, d:]
    return gH, {"W": gW, "bias": gb}
