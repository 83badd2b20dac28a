"""Candidate-node predictor: GraphSAGE embeddings fed through a BiLSTM.

Each snapshot is embedded by two GraphSAGE layers over degree features.
For a target step ``t`` every node gets the sequence of its own embeddings
over the ``d`` snapshots ending at ``t`` (zero rows where it was absent); a
BiLSTM reads the sequence and a logistic head on the last step scores the
node. With ``include_current=False`` the window ends at ``t-1`` instead and
the model forecasts labels of a snapshot it has not seen.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import GraphInputError, Snapshot, TemporalGraph, neighbor_degree_means, undirected_projection
from .nn import (
    AdamState,
    LstmParams,
    SageLayerParams,
    adam_step,
    bce_loss,
    bilstm_backward,
    bilstm_forward,
    mean_aggregator,
    sage_layer_backward,
    sage_layer_forward,
    sgd_step,
    sigmoid,
)
from .nn.dense import uniform_init
from .nn.serialize import dump_params, load_params
from .seeding import derive_seed

FEATURE_DIM = 5


def init_features(s: Snapshot, normalize: bool = True) -> np.ndarray:
    """Rows ``[deg, mean neighbour deg, 1, 1, 1]``; zero rows for absent nodes."""
    u = undirected_projection(s)
    deg = u.out_degrees().astype(np.float64)
    nbr = neighbor_degree_means(u)
    if normalize:
        dmax = deg.max() if deg.size and deg.max() > 0 else 1.0
        deg = deg / dmax
        nbr = nbr / dmax
    X = np.column_stack([deg, nbr, np.ones((u.num_nodes, 3))])
    X[~u.present] = 0.0
    return X


@dataclass
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 4
    epochs: int = 300
    hidden: int = 128
    sage_dims: tuple[int, ...] = (32, 32)
    d: int = 3
    alpha: float = 40.0
    split_fraction: float = 0.7
    seed: int = 0
    optimizer: str = "adam"
    normalize_features: bool = True
    fanout: int | None = None
    aux_weight: float = 0.0
    include_current: bool = True
    keep: str = "best_test"  # or "last": the weights after the final epoch

    def __post_init__(self):
        if self.keep not in ("best_test", "last"):
            raise ValueError(f"unknown keep policy {self.keep!r}")
        if not 0 < self.split_fraction < 1:
            raise ValueError("split_fraction must lie in (0, 1)")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        self.sage_dims = tuple(self.sage_dims)


@dataclass
class PredictorModel:
    sage: list[SageLayerParams]
    fwd: LstmParams
    bwd: LstmParams
    head_W: np.ndarray  # (1, 2H)
    head_b: np.ndarray  # (1,)
    d: int
    alpha: float = 40.0
    normalize_features: bool = True
    fanout: int | None = None
    aux_W: np.ndarray | None = None  # (emb, 2H), next-embedding regressor
    aux_b: np.ndarray | None = None
    config: dict = field(default_factory=dict)
    include_current: bool = True

    def input_steps(self, t: int) -> list[int]:
        first = t - self.d + 1 if self.include_current else t - self.d
        return list(range(first, first + self.d))

    @classmethod
    def init(cls, cfg: TrainConfig) -> "PredictorModel":
        rng = np.random.default_rng(derive_seed(cfg.seed, "init"))
        sage = []
        dim = FEATURE_DIM
        for out in cfg.sage_dims:
            sage.append(SageLayerParams.init(dim, out, rng))
            dim = out
        H = cfg.hidden
        fwd = LstmParams.init(dim, H, rng, "forward")
        bwd = LstmParams.init(dim, H, rng, "backward")
        head_W = uniform_init(rng, (1, 2 * H), 2 * H)
        head_b = uniform_init(rng, (1,), 2 * H)
        aux_W = aux_b = None
        if cfg.aux_weight > 0:
            aux_W = uniform_init(rng, (dim, 2 * H), 2 * H)
            aux_b = np.zeros(dim)
        return cls(sage, fwd, bwd, head_W, head_b, cfg.d, cfg.alpha, cfg.normalize_features, cfg.fanout,
                   aux_W, aux_b, config=_config_echo(cfg), include_current=cfg.include_current)

    @property
    def emb_dim(self) -> int:
        return self.sage[-1].out_dim

    @property
    def hidden(self) -> int:
        return self.fwd.hidden

    def params(self) -> dict[str, np.ndarray]:
        """Named views of every trainable array (mutating them mutates the model)."""
        out = {}
        for i, layer in enumerate(self.sage):
            out[f"sage{i}.W"] = layer.W
            out[f"sage{i}.bias"] = layer.bias
        out["lstm_fwd.W"] = self.fwd.W
        out["lstm_fwd.b"] = self.fwd.b
        out["lstm_bwd.W"] = self.bwd.W
        out["lstm_bwd.b"] = self.bwd.b
        out["head.W"] = self.head_W
        out["head.b"] = self.head_b
        if self.aux_W is not None:
            out["aux.W"] = self.aux_W
            out["aux.b"] = self.aux_b
        return out

    def copy(self) -> "PredictorModel":
        m = PredictorModel(
            [SageLayerParams(l.W.copy(), l.bias.copy()) for l in self.sage],
            LstmParams(self.fwd.W.copy(), self.fwd.b.copy(), "forward"),
            LstmParams(self.bwd.W.copy(), self.bwd.b.copy(), "backward"),
            self.head_W.copy(), self.head_b.copy(), self.d, self.alpha, self.normalize_features, self.fanout,
            None if self.aux_W is None else self.aux_W.copy(),
            None if self.aux_b is None else self.aux_b.copy(),
            dict(self.config),
            self.include_current,
        )
        return m

    def save(self, path) -> None:
        meta = {
            "kind": "gnn-bilstm-candidate-predictor",
            "d": self.d,
            "alpha": self.alpha,
            "normalize_features": self.normalize_features,
            "fanout": self.fanout,
            "feature_dim": FEATURE_DIM,
            "sage_dims": [l.out_dim for l in self.sage],
            "hidden": self.hidden,
            "aux": self.aux_W is not None,
            "include_current": self.include_current,
            "config": self.config,
        }
        dump_params(path, meta, self.params())

    @classmethod
    def load(cls, path) -> "PredictorModel":
        meta, arrays = load_params(path)
        nsage = len(meta["sage_dims"])
        sage = [SageLayerParams(arrays[f"sage{i}.W"], arrays[f"sage{i}.bias"]) for i in range(nsage)]
        return cls(
            sage,
            LstmParams(arrays["lstm_fwd.W"], arrays["lstm_fwd.b"], "forward"),
            LstmParams(arrays["lstm_bwd.W"], arrays["lstm_bwd.b"], "backward"),
            arrays["head.W"], arrays["head.b"], meta["d"], meta["alpha"], meta["normalize_features"],
            meta.get("fanout"), arrays.get("aux.W"), arrays.get("aux.b"), meta.get("config", {}),
            meta.get("include_current", True),
        )


def _config_echo(cfg: TrainConfig) -> dict:
    out = asdict(cfg)
    out["sage_dims"] = list(cfg.sage_dims)
    return out


# forward / backward over a batch of windows


def _aggregator(model: PredictorModel, s: Snapshot, key: int):
    if model.fanout is None:
        return mean_aggregator(s)
    seed = model.config.get("seed", 0)
    return mean_aggregator(s, model.fanout, np.random.default_rng(derive_seed(seed, "fanout", key)))


class _SnapshotCache:
    """Per-snapshot features and aggregators, which do not depend on weights."""

    def __init__(self, model: PredictorModel, snaps: Sequence[Snapshot]):
        self.snaps = list(snaps)
        self.X = [init_features(s, model.normalize_features) for s in snaps]
        self.agg = [_aggregator(model, s, j) for j, s in enumerate(snaps)]
        self.present = [s.present for s in snaps]


def _embed(model: PredictorModel, X: np.ndarray, agg):
    H = X
    caches = []
    for layer in model.sage:
        H, c = sage_layer_forward(None, H, layer, agg=agg)
        caches.append(c)
    return H, caches


def embed_snapshot(model: PredictorModel, s: Snapshot) -> np.ndarray:
    X = init_features(s, model.normalize_features)
    if X.shape[1] != model.sage[0].in_dim:
        raise GraphInputError(f"model expects {model.sage[0].in_dim} features, got {X.shape[1]}")
    H, _ = _embed(model, X, _aggregator(model, s, 0))
    return H


@dataclass
class Window:
    """One prediction target: the present nodes of snapshot ``t``."""

    t: int
    nodes: np.ndarray
    labels: np.ndarray | None = None


def _forward(model: PredictorModel, cache: _SnapshotCache, windows: Sequence[Window]):
    steps = sorted({j for w in windows for j in model.input_steps(w.t)})
    emb, emb_caches = {}, {}
    for j in steps:
        H, c = _embed(model, cache.X[j], cache.agg[j])
        emb[j] = H * cache.present[j][:, None]
        emb_caches[j] = c
    seq = np.concatenate(
        [np.stack([emb[j][w.nodes] for j in model.input_steps(w.t)], axis=1) for w in windows], axis=0
    )
    out, lcache = bilstm_forward(seq, model.fwd, model.bwd)
    last = out[:, -1, :]
    logits = last @ model.head_W.T + model.head_b
    prob = sigmoid(logits[:, 0])
    state = dict(steps=steps, emb=emb, emb_caches=emb_caches, seq=seq, out=out, lcache=lcache, last=last)
    return prob, state


def _loss_and_grads(
    model: PredictorModel,
    cache: _SnapshotCache,
    windows: Sequence[Window],
    aux_weight: float = 0.0,
    aux_targets: tuple[np.ndarray, np.ndarray] | None = None,
):
    prob, st = _forward(model, cache, windows)
    target = np.concatenate([w.labels for w in windows]).astype(np.float64)
    loss, _ = bce_loss(prob, target)
    N = target.size
    g_logit = ((prob - target) / N)[:, None]
    last = st["last"]
    grads = {"head.W": g_logit.T @ last, "head.b": g_logit.sum(axis=0)}
    g_last = g_logit @ model.head_W
    if model.aux_W is not None and aux_weight > 0:
        # regress each node's next embedding from the final state; targets are constants
        tgt, keep = aux_targets if aux_targets is not None else aux_target_embeddings(model, cache, windows)
        pred = last @ model.aux_W.T + model.aux_b
        diff = (pred - tgt) * keep[:, None]
        denom = max(1.0, keep.sum() * diff.shape[1])
        loss += aux_weight * float((diff * diff).sum() / denom)
        g_pred = aux_weight * 2.0 * diff / denom
        grads["aux.W"] = g_pred.T @ last
        grads["aux.b"] = g_pred.sum(axis=0)
        g_last = g_last + g_pred @ model.aux_W
    elif model.aux_W is not None:
        grads["aux.W"] = np.zeros_like(model.aux_W)
        grads["aux.b"] = np.zeros_like(model.aux_b)
    g_out = np.zeros_like(st["out"])
    g_out[:, -1, :] = g_last
    g_seq, (dWf, dbf), (dWb, dbb) = bilstm_backward(g_out, st["lcache"])
    grads.update({"lstm_fwd.W": dWf, "lstm_fwd.b": dbf, "lstm_bwd.W": dWb, "lstm_bwd.b": dbb})

    g_emb = {j: np.zeros_like(st["emb"][j]) for j in st["steps"]}
    row = 0
    for w in windows:
        n = w.nodes.size
        for k, j in enumerate(model.input_steps(w.t)):
            # nodes are unique within a window, so plain fancy-index add is safe
            g_emb[j][w.nodes] += g_seq[row:row + n, k, :]
        row += n
    for i in range(len(model.sage)):
        grads[f"sage{i}.W"] = np.zeros_like(model.sage[i].W)
        grads[f"sage{i}.bias"] = np.zeros_like(model.sage[i].bias)
    for j in st["steps"]:
        g = g_emb[j] * cache.present[j][:, None]
        for i in range(len(model.sage) - 1, -1, -1):
            g, gp = sage_layer_backward(g, st["emb_caches"][j][i])
            grads[f"sage{i}.W"] += gp["W"]
            grads[f"sage{i}.bias"] += gp["bias"]
    return loss, grads


def aux_target_embeddings(model: PredictorModel, cache: _SnapshotCache, windows: Sequence[Window]):
    """Embedding of each item's node one step after its input window.

    Returns ``(targets, keep)``; ``keep`` is False for items whose window
    already ends at the last snapshot.
    """
    rows, keep = [], []
    for w in windows:
        j = model.input_steps(w.t)[-1] + 1
        if j >= len(cache.X):
            rows.append(np.zeros((w.nodes.size, model.emb_dim)))
            keep.append(np.zeros(w.nodes.size, dtype=bool))
            continue
        H, _ = _embed(model, cache.X[j], cache.agg[j])
        rows.append((H * cache.present[j][:, None])[w.nodes])
        keep.append(np.ones(w.nodes.size, dtype=bool))
    return np.concatenate(rows), np.concatenate(keep)


def build_windows(tg: TemporalGraph, d: int, labels: Sequence[np.ndarray] | None = None) -> list[Window]:
    """Target steps ``d .. T-1``, each over the nodes present at the target."""
    if tg.T <= d:
        raise GraphInputError(f"need more than d={d} snapshots, got T={tg.T}")
    out = []
    for t in range(d, tg.T):
        nodes = tg[t].present_nodes()
        lab = None if labels is None else np.asarray(labels[t])[nodes]
        out.append(Window(t, nodes, lab))
    return out


def build_sequences(tg: TemporalGraph, model: PredictorModel, d: int | None = None, labels=None):
    """Input sequences for every (target step, present node) item.

    Returns a list of ``(window, inputs)`` with ``inputs`` of shape
    ``(len(window.nodes), d, emb_dim)``.
    """
    if d is not None and d != model.d:
        raise GraphInputError(f"model was built for d={model.d}, not {d}")
    windows = build_windows(tg, model.d, labels)
    embs = [embed_snapshot(model, s) * s.present[:, None] for s in tg.snapshots]
    return [(w, np.stack([embs[j][w.nodes] for j in model.input_steps(w.t)], axis=1)) for w in windows]


@dataclass
class PredictionResult:
    prob: np.ndarray
    candidates: np.ndarray
    present: np.ndarray
    snapshot: int | None = None


def predict_candidates(
    model: PredictorModel,
    window: Sequence[Snapshot],
    present: np.ndarray | None = None,
    snapshot: int | None = None,
) -> PredictionResult:
    """Score every node from the last ``d`` snapshots.

    Candidates are nodes with probability >= 0.5 among ``present`` (the
    nodes present in the last window snapshot unless given explicitly, as
    a forecasting model does for the snapshot after the window).
    """
    if len(window) != model.d:
        raise GraphInputError(f"window must hold d={model.d} snapshots, got {len(window)}")
    cache = _SnapshotCache(model, window)
    n = window[-1].num_nodes
    w = Window(model.d - 1 if model.include_current else model.d, np.arange(n))
    prob, _ = _forward(model, cache, [w])
    if present is None:
        present = window[-1].present
    present = np.asarray(present, dtype=bool)
    cand = np.flatnonzero(present & (prob >= 0.5))
    return PredictionResult(prob, cand, present.copy(), snapshot)


def accuracy(pred: PredictionResult, truth: np.ndarray, present: np.ndarray | None = None) -> float:
    present = pred.present if present is None else np.asarray(present, dtype=bool)
    idx = np.flatnonzero(present)
    if idx.size == 0:
        return float("nan")
    guess = (pred.prob[idx] >= 0.5).astype(np.int8)
    return float(np.mean(guess == np.asarray(truth)[idx]))


def _pooled_accuracy(model, cache, windows) -> float:
    if not windows:
        return float("nan")
    prob, _ = _forward(model, cache, windows)
    target = np.concatenate([w.labels for w in windows])
    return float(np.mean((prob >= 0.5).astype(np.int8) == target))


def split_windows(windows: list[Window], fraction: float) -> tuple[list[Window], list[Window]]:
    n_train = math.ceil(fraction * len(windows))
    return windows[:n_train], windows[n_train:]


def train(
    tg: TemporalGraph,
    labels: Sequence[np.ndarray],
    cfg: TrainConfig,
    log=None,
) -> tuple[PredictorModel, dict]:
    """Joint end-to-end training with a chronological train/test split.

    A mini-batch holds ``cfg.batch_size`` target windows (every present node
    of each). Returns the parameters from the epoch with the best test
    accuracy (earliest on ties), or the final ones with ``keep="last"``,
    and a history dict.
    """
    if len(labels) != tg.T:
        raise GraphInputError("need one label vector per snapshot")
    train_w, test_w = split_windows(build_windows(tg, cfg.d, labels), cfg.split_fraction)
    # the split counts every target step; steps with no present node carry no items
    train_w = [w for w in train_w if w.nodes.size]
    test_w = [w for w in test_w if w.nodes.size]
    if not test_w:
        raise GraphInputError("no test steps remain after the chronological split")
    if not train_w:
        raise GraphInputError("no training steps")
    model = PredictorModel.init(cfg)
    cache = _SnapshotCache(model, tg.snapshots)
    params = model.params()
    adam = AdamState(lr=cfg.lr)
    history = {
        "epoch": [],
        "train_loss": [],
        "test_accuracy": [],
        "train_steps": [w.t for w in train_w],
        "test_steps": [w.t for w in test_w],
        "batches": [],
    }
    best_acc, best = -1.0, model.copy()
    for epoch in range(1, cfg.epochs + 1):
        order = np.random.default_rng(derive_seed(cfg.seed, "shuffle", epoch)).permutation(len(train_w))
        losses, weights = [], []
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_w[i] for i in order[start:start + cfg.batch_size]]
            history["batches"].append([w.t for w in batch])
            loss, grads = _loss_and_grads(model, cache, batch, cfg.aux_weight)
            if cfg.optimizer == "adam":
                adam_step(params, grads, adam)
            else:
                sgd_step(params, grads, cfg.lr)
            losses.append(loss)
            weights.append(sum(w.nodes.size for w in batch))
        train_loss = float(np.average(losses, weights=weights))
        acc = _pooled_accuracy(model, cache, test_w)
        history["epoch"].append(epoch)
        history["train_loss"].append(train_loss)
        history["test_accuracy"].append(acc)
        if log is not None:
            log(epoch, train_loss, acc)
        if acc > best_acc:
            best_acc, best = acc, model.copy()
    history["best_test_accuracy"] = best_acc
    if cfg.keep == "last":
        return model, history
    return best, history


def write_train_log(path, history: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("epoch,train_loss,test_accuracy\n")
        for e, l, a in zip(history["epoch"], history["train_loss"], history["test_accuracy"]):
            fh.write(f"{e},{float(l)!r},{float(a)!r}\n")


def model_loss_closure(model: PredictorModel, tg: TemporalGraph, labels: Sequence[np.ndarray], aux_weight: float = 0.0):
    """Loss/gradient closure over every target window, for gradient checks."""
    windows = [w for w in build_windows(tg, model.d, labels) if w.nodes.size]
    cache = _SnapshotCache(model, tg.snapshots)
    targets = aux_target_embeddings(model, cache, windows) if model.aux_W is not None and aux_weight > 0 else None
    return lambda: _loss_and_grads(model, cache, windows, aux_weight, targets)
