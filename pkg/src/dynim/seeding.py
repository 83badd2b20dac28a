"""Keyed randomness.

Every random quantity in the package is derived from a master seed plus a
tuple of keys, so inserting or reordering work never shifts other streams.
"""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *keys) -> int:
    """64-bit seed derived from ``seed`` and an arbitrary key tuple."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(seed) & _MASK64,) + tuple(keys)).encode())
    return int.from_bytes(h.digest(), "little")


def rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, rows: int, cols: int, *, open_low: bool = False) -> np.ndarray:
    """Matrix of uniforms where entry (i, j) depends only on (seed, i, j).

    Row i is the stream for Monte Carlo iteration i, column j the draw for
    item j (an arc or a node). With ``open_low`` values lie in (0, 1],
    otherwise in [0, 1).
    """
    base = np.uint64(derive_seed(seed, "keyed_uniform"))
    with np.errstate(over="ignore"):
        r = _splitmix64(base ^ np.arange(rows, dtype=np.uint64))
        x = _splitmix64(r[:, None] ^ (np.arange(cols, dtype=np.uint64) * np.uint64(0xD6E8FEB86659FD93))[None, :])
    mant = (x >> np.uint64(11)).astype(np.float64)
    if open_low:
        mant += 1.0
    return mant * (1.0 / 9007199254740992.0)
