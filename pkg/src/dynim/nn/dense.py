"""Affine layer ``y = x W^T + b``."""
from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


def check_finite(name: str, a: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"non-finite values in {name}")
    return a


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    if x.ndim != 2 or W.ndim != 2 or x.shape[1] != W.shape[1] or b.shape != (W.shape[0],):
        raise ShapeError(f"dense: x {x.shape}, W {W.shape}, b {b.shape}")
    check_finite("dense input", x)
    return x @ W.T + b, (x, W)


def dense_backward(grad_out: np.ndarray, cache):
    x, W = cache
    return grad_out @ W, grad_out.T @ x, grad_out.sum(axis=0)
