"""LSTM cell and bidirectional LSTM with hand-written backward passes.

Gate blocks in ``W`` and ``b`` are ordered input, forget, cell, output.
Inputs are batched along the first axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import ShapeError, check_finite, uniform_init


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass
class LstmParams:
    W: np.ndarray  # (4H, in + H)
    b: np.ndarray  # (4H,)
    direction: str = "forward"

    @classmethod
    def init(cls, in_dim: int, hidden: int, rng: np.random.Generator, direction: str = "forward") -> "LstmParams":
        fan_in = in_dim + hidden
        W = uniform_init(rng, (4 * hidden, fan_in), fan_in)
        b = uniform_init(rng, (4 * hidden,), fan_in)
        b[hidden:2 * hidden] = 1.0
        return cls(W, b, direction)

    @property
    def hidden(self) -> int:
        return self.W.shape[0] // 4

    @property
    def in_dim(self) -> int:
        return self.W.shape[1] - self.hidden


def lstm_cell_forward(x, h_prev, c_prev, params: LstmParams):
    H = params.hidden
    if x.shape[1] != params.in_dim or h_prev.shape[1] != H or c_prev.shape != h_prev.shape:
        raise ShapeError(f"lstm: x {x.shape}, h {h_prev.shape}, c {c_prev.shape}, W {params.W.shape}")
    z = np.concatenate([x, h_prev], axis=1)
    a = z @ params.W.T + params.b
    i = sigmoid(a[:, :H])
    f = sigmoid(a[:, H:2 * H])
    g = np.tanh(a[:, 2 * H:3 * H])
    o = sigmoid(a[:, 3 * H:])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (z, i, f, g, o, c_prev, tc, params)


def lstm_cell_backward(dh, dc, cache):
    """Gradients through one step given upstream ``dh`` and ``dc``.

    Returns ``(dx, dh_prev, dc_prev, dW, db)``.
    """
    z, i, f, g, o, c_prev, tc, params = cache
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc * tc)
    di = dc * g
    df = dc * c_prev
    dg = dc * i
    dc_prev = dc * f
    da = np.concatenate(
        [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)], axis=1
    )
    dW = da.T @ z
    db = da.sum(axis=0)
    dz = da @ params.W
    d = params.in_dim
    return dz[:, :d], dz[:, d:], dc_prev, dW, db


def _run(seq, params: LstmParams, reverse: bool):
    N, T, _ = seq.shape
    H = params.hidden
    h = np.zeros((N, H))
    c = np.zeros((N, H))
    out = np.empty((N, T, H))
    caches = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        h, c, caches[t] = lstm_cell_forward(seq[:, t, :], h, c, params)
        out[:, t, :] = h
    return out, caches


def _run_backward(grad_h, caches, params: LstmParams, reverse: bool, in_dim: int):
    N, T, H = grad_h.shape
    dx = np.empty((N, T, in_dim))
    dW = np.zeros_like(params.W)
    db = np.zeros_like(params.b)
    dh_next = np.zeros((N, H))
    dc_next = np.zeros((N, H))
    steps = range(T) if reverse else range(T - 1, -1, -1)
    for t in steps:
        dx[:, t, :], dh_next, dc_next, gW, gb = lstm_cell_backward(grad_h[:, t, :] + dh_next, dc_next, caches[t])
        dW += gW
        db += gb
    return dx, dW, db


def bilstm_forward(seq: np.ndarray, fwd: LstmParams, bwd: LstmParams):
    """``seq`` is (N, d, in); returns (N, d, 2H) with forward states first."""
    if seq.ndim != 3 or seq.shape[1] < 1:
        raise ShapeError("bilstm needs a non-empty (N, d, in) sequence")
    check_finite("bilstm input", seq)
    hf, cf = _run(seq, fwd, reverse=False)
    hb, cb = _run(seq, bwd, reverse=True)
    return np.concatenate([hf, hb], axis=2), (cf, cb, fwd, bwd, seq.shape[2])


def bilstm_backward(grad_out: np.ndarray, cache):
    """Returns ``(grad_seq, (dW_fwd, db_fwd), (dW_bwd, db_bwd))``."""
    cf, cb, fwd, bwd, in_dim = cache
    H = fwd.hidden
    dxf, dWf, dbf = _run_backward(grad_out[:, :, :H], cf, fwd, False, in_dim)
    dxb, dWb, dbb = _run_backward(grad_out[:, :, H:], cb, bwd, True, in_dim)
    return dxf + dxb, (dWf, dbf), (dWb, dbb)
