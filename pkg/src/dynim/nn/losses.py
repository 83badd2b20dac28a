from __future__ import annotations

import numpy as np

EPS = 1e-12


def bce_loss(pred: np.ndarray, target: np.ndarray, mask: np.ndarray | None = None):
    """Mean binary cross-entropy over masked entries and its gradient wrt ``pred``."""
    if mask is None:
        mask = np.ones_like(pred, dtype=bool)
    m = mask.astype(np.float64)
    count = m.sum()
    if count == 0:
        return 0.0, np.zeros_like(pred)
    p = np.clip(pred, EPS, 1.0 - EPS)
    loss = -(target * np.log(p) + (1 - target) * np.log(1 - p))
    grad = (p - target) / (p * (1 - p)) * m / count
    return float((loss * m).sum() / count), grad


def mse_loss(pred: np.ndarray, target: np.ndarray):
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size
