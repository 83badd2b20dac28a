from __future__ import annotations

from typing import Callable

import numpy as np


def grad_check(
    f: Callable[[], tuple[float, dict[str, np.ndarray]]],
    params: dict[str, np.ndarray],
    eps: float = 1e-5,
    n_coords: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` evaluates the loss and analytic gradients at the current values of
    ``params``, which are perturbed in place and restored. At least
    ``n_coords`` coordinates are checked (all of them if there are fewer),
    spread across every parameter array.
    """
    loss, grads = f()
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss")
    grads = {k: np.array(v, copy=True) for k, v in grads.items()}
    coords = [(name, i) for name, p in params.items() for i in range(p.size)]
    if not coords:
        return 0.0
    if len(coords) > n_coords:
        rng = np.random.default_rng(seed)
        # every array contributes, the rest sampled uniformly
        picked = {(name, int(rng.integers(p.size))) for name, p in params.items() if p.size}
        extra = rng.choice(len(coords), size=n_coords, replace=False)
        picked.update(coords[i] for i in extra)
        coords = sorted(picked)
    worst = 0.0
    for name, i in coords:
        flat = params[name].reshape(-1)
        old = flat[i]
        flat[i] = old + eps
        fp, _ = f()
        flat[i] = old - eps
        fm, _ = f()
        flat[i] = old
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError("non-finite loss during finite differences")
        num = (fp - fm) / (2 * eps)
        ana = grads[name].reshape(-1)[i]
        err = abs(ana - num) / max(1e-8, abs(ana) + abs(num))
        worst = max(worst, err)
    return worst
