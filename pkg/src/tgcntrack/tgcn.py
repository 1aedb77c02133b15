"""Time-domain graph convolution over a window of past appearance features.

A window holds the C most recent features of one track (row 0 oldest, row
C-1 newest). The graph over those C frames has adjacency ``A = Q + P`` where
``Q`` links each frame to its successor and ``P`` is a learned row-stochastic
matrix. ``L`` propagation layers ``X <- relu(A X W)`` (the last one linear)
turn the window into per-frame scores. The scores are averaged into a weight
per frame, and the next appearance is predicted as the weighted sum of the
window rows.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .core import DimensionMismatch, EmptyDataset, ParseError

log = logging.getLogger(__name__)

WEIGHT_EPS = 1e-12


@dataclass
class TgcnModel:
    window_c: int
    feature_dim: int
    layers_l: int
    weights: List[np.ndarray]
    p_logits: np.ndarray

    def __post_init__(self):
        if self.window_c < 1 or self.feature_dim < 1 or self.layers_l < 1:
            raise ValueError("window_c, feature_dim and layers_l must be positive")
        if len(self.weights) != self.layers_l:
            raise DimensionMismatch(f"expected {self.layers_l} weight matrices, got {len(self.weights)}")
        d = self.feature_dim
        self.weights = [np.array(w, dtype=float) for w in self.weights]
        for w in self.weights:
            if w.shape != (d, d):
                raise DimensionMismatch(f"weight matrix has shape {w.shape}, expected {(d, d)}")
            if not np.all(np.isfinite(w)):
                raise ValueError("weights contain non-finite values")
        self.p_logits = np.array(self.p_logits, dtype=float)
        if self.p_logits.shape != (self.window_c, self.window_c):
            raise DimensionMismatch(f"p_logits has shape {self.p_logits.shape}, expected C x C")
        if not np.all(np.isfinite(self.p_logits)):
            raise ValueError("p_logits contain non-finite values")

    def copy(self) -> "TgcnModel":
        return TgcnModel(self.window_c, self.feature_dim, self.layers_l,
                         [w.copy() for w in self.weights], self.p_logits.copy())

    def same_as(self, other: "TgcnModel") -> bool:
        return (
            (self.window_c, self.feature_dim, self.layers_l)
            == (other.window_c, other.feature_dim, other.layers_l)
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and np.array_equal(self.p_logits, other.p_logits)
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 300
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def init_model(window_c: int = 8, feature_dim: int = 16, layers_l: int = 2, seed: int = 0) -> TgcnModel:
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(feature_dim)
    weights = [rng.uniform(-bound, bound, size=(feature_dim, feature_dim)) for _ in range(layers_l)]
    return TgcnModel(window_c, feature_dim, layers_l, weights, np.zeros((window_c, window_c)))


def build_q(c: int) -> np.ndarray:
    if c < 1:
        raise ValueError("window size must be at least 1")
    return np.eye(c, k=1)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def p_matrix(m: TgcnModel) -> np.ndarray:
    return _softmax_rows(m.p_logits)


def adjacency(m: TgcnModel) -> np.ndarray:
    return build_q(m.window_c) + p_matrix(m)


def as_window(m: TgcnModel, x0) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    if x.ndim != 2 or x.shape != (m.window_c, m.feature_dim):
        raise DimensionMismatch(
            f"window has shape {x.shape}, model expects {(m.window_c, m.feature_dim)}")
    return x


def _propagate(m: TgcnModel, x0: np.ndarray, a: np.ndarray):
    acts = [x0]
    pre = []
    x = x0
    for l, w in enumerate(m.weights):
        z = a @ x @ w
        pre.append(z)
        x = np.maximum(z, 0.0) if l < m.layers_l - 1 else z
        acts.append(x)
    return acts, pre


def forward(m: TgcnModel, x0) -> List[np.ndarray]:
    """Layer activations ``[X0, X1, ..., XL]``; hidden layers use relu, the last is linear."""
    acts, _ = _propagate(m, as_window(m, x0), adjacency(m))
    return acts


def time_weights(x_last: np.ndarray) -> np.ndarray:
    """Per-frame weights from the final layer: row means, normalised to sum to one.

    Falls back to uniform weights when the normaliser is numerically zero.
    """
    raw = np.asarray(x_last, dtype=float).mean(axis=1)
    s = raw.sum()
    if abs(s) <= WEIGHT_EPS:
        return np.full(raw.shape[0], 1.0 / raw.shape[0])
    return raw / s


def predict_feature(m: TgcnModel, x0) -> np.ndarray:
    x0 = as_window(m, x0)
    return time_weights(forward(m, x0)[-1]) @ x0


def _target(m: TgcnModel, m_next) -> np.ndarray:
    t = np.asarray(m_next, dtype=float).reshape(-1)
    if t.shape[0] != m.feature_dim:
        raise DimensionMismatch(f"target has dimension {t.shape[0]}, model expects {m.feature_dim}")
    return t


def loss(m: TgcnModel, x0, m_next) -> float:
    r = _target(m, m_next) - predict_feature(m, x0)
    return float(r @ r)


def gradients(m: TgcnModel, x0, m_next) -> Tuple[List[np.ndarray], np.ndarray]:
    """Analytic gradients of :func:`loss` with respect to each weight matrix and the P logits."""
    x0 = as_window(m, x0)
    target = _target(m, m_next)
    p = p_matrix(m)
    a = build_q(m.window_c) + p
    acts, pre = _propagate(m, x0, a)
    c, d = x0.shape

    raw = acts[-1].mean(axis=1)
    s = raw.sum()
    grad_w = [np.zeros_like(w) for w in m.weights]
    grad_logits = np.zeros_like(m.p_logits)
    if abs(s) <= WEIGHT_EPS:
        # uniform fallback does not depend on any parameter
        return grad_w, grad_logits
    weights = raw / s
    pred = weights @ x0
    g_pred = 2.0 * (pred - target)
    g_weights = x0 @ g_pred
    g_raw = (g_weights - weights @ g_weights) / s
    g_x = np.repeat(g_raw[:, None] / d, d, axis=1)

    g_a = np.zeros_like(a)
    for l in range(m.layers_l - 1, -1, -1):
        g_z = g_x if l == m.layers_l - 1 else g_x * (pre[l] > 0)
        ax = a @ acts[l]
        grad_w[l] = ax.T @ g_z
        g_a += g_z @ (acts[l] @ m.weights[l]).T
        g_x = a.T @ g_z @ m.weights[l].T

    grad_logits = p * (g_a - (g_a * p).sum(axis=1, keepdims=True))
    return grad_w, grad_logits


def dataset_loss(m: TgcnModel, dataset: Sequence) -> float:
    return float(np.mean([loss(m, x, y) for x, y in dataset]))


def copy_last_loss(dataset: Sequence) -> float:
    """Mean squared error of the predictor that repeats the newest window row."""
    return float(np.mean([np.sum((np.asarray(y) - np.asarray(x)[-1]) ** 2) for x, y in dataset]))


def batch_loss_and_gradients(m: TgcnModel, xs: np.ndarray, ys: np.ndarray):
    """Mean loss and mean gradients over a stacked batch ``xs`` (N, C, d), ``ys`` (N, d).

    Vectorised form of :func:`loss` / :func:`gradients` used by the trainer.
    """
    p = p_matrix(m)
    a = build_q(m.window_c) + p
    n, c, d = xs.shape
    acts = [xs]
    pre = []
    x = xs
    for l, w in enumerate(m.weights):
        z = np.matmul(np.matmul(a, x), w)
        pre.append(z)
        x = np.maximum(z, 0.0) if l < m.layers_l - 1 else z
        acts.append(x)

    raw = acts[-1].mean(axis=2)
    s = raw.sum(axis=1)
    live = np.abs(s) > WEIGHT_EPS
    safe_s = np.where(live, s, 1.0)
    weights = np.where(live[:, None], raw / safe_s[:, None], 1.0 / c)
    pred = np.einsum("nc,ncd->nd", weights, xs)
    resid = pred - ys
    mean_loss = float(np.mean(np.sum(resid * resid, axis=1)))

    g_pred = 2.0 * resid
    g_weights = np.einsum("ncd,nd->nc", xs, g_pred)
    g_raw = (g_weights - np.sum(weights * g_weights, axis=1, keepdims=True)) / safe_s[:, None]
    g_raw[~live] = 0.0
    g_x = np.repeat(g_raw[:, :, None] / d, d, axis=2)

    grad_w = [np.zeros_like(w) for w in m.weights]
    g_a = np.zeros_like(a)
    for l in range(m.layers_l - 1, -1, -1):
        g_z = g_x if l == m.layers_l - 1 else g_x * (pre[l] > 0)
        ax = np.matmul(a, acts[l])
        grad_w[l] = np.einsum("ncd,nce->de", ax, g_z) / n
        xw = np.matmul(acts[l], m.weights[l])
        g_a += np.einsum("nid,njd->ij", g_z, xw) / n
        g_x = np.matmul(np.matmul(a.T, g_z), m.weights[l].T)
    grad_logits = p * (g_a - (g_a * p).sum(axis=1, keepdims=True))
    return mean_loss, grad_w, grad_logits


@dataclass
class TrainResult:
    model: TgcnModel
    initial_loss: float
    best_loss: float
    trace: List[float] = field(default_factory=list)


def fit(m: TgcnModel, dataset: Sequence, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Full-batch gradient descent on the mean loss, keeping the best model seen.

    ``trace[k]`` is the dataset loss after ``k`` updates.
    """
    if len(dataset) == 0:
        raise EmptyDataset("training dataset is empty")
    xs = np.stack([as_window(m, x) for x, _ in dataset])
    ys = np.stack([_target(m, y) for _, y in dataset])
    cur = m.copy()
    best = cur.copy()
    best_loss = float("inf")
    trace = []
    for epoch in range(cfg.epochs + 1):
        cur_loss, gw, gp = batch_loss_and_gradients(cur, xs, ys)
        trace.append(cur_loss)
        if cur_loss < best_loss:
            best_loss = cur_loss
            best = cur.copy()
        if epoch == cfg.epochs:
            break
        for w, g in zip(cur.weights, gw):
            w -= cfg.learning_rate * g
        cur.p_logits -= cfg.learning_rate * gp
        if not (all(np.all(np.isfinite(w)) for w in cur.weights) and np.all(np.isfinite(cur.p_logits))):
            log.warning("training diverged at epoch %d; keeping best model", epoch)
            break
    return TrainResult(best, trace[0], best_loss, trace)


def train(m: TgcnModel, dataset: Sequence, cfg: TrainConfig = TrainConfig()) -> TgcnModel:
    return fit(m, dataset, cfg).model


_HEADER = re.compile(r"^TGCN v1 C=(\d+) d=(\d+) L=(\d+)$")


def dumps(m: TgcnModel) -> str:
    lines = [f"TGCN v1 C={m.window_c} d={m.feature_dim} L={m.layers_l}"]
    for mat in [*m.weights, m.p_logits]:
        for row in mat:
            lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> TgcnModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty model file", 1)
    hm = _HEADER.match(lines[0].strip())
    if hm is None:
        raise ParseError("bad model header, expected 'TGCN v1 C=<int> d=<int> L=<int>'", 1)
    c, d, nl = map(int, hm.groups())
    expected = nl * d + c
    if len(lines) - 1 != expected:
        raise ParseError(f"model body has {len(lines) - 1} rows, expected {expected}", len(lines))
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            vals = [float(t) for t in ln.split()]
        except ValueError as exc:
            raise ParseError(str(exc), i) from None
        width = d if i - 2 < nl * d else c
        if len(vals) != width or not all(np.isfinite(vals)):
            raise ParseError(f"expected {width} finite values", i)
        rows.append(vals)
    weights = [np.array(rows[l * d:(l + 1) * d]) for l in range(nl)]
    return TgcnModel(c, d, nl, weights, np.array(rows[nl * d:]))


def save(m: TgcnModel, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(m))


def load(path) -> TgcnModel:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())
