"""One-hidden-layer ReLU network with a softmax output, trained by RMSprop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Standardizer

log = logging.getLogger(__name__)


@dataclass
class AnnConfig:
    hidden_units: int = 32
    epochs: int = 30
    batch: int = 32
    learning_rate: float = 1e-3
    decay: float = 0.9
    epsilon: float = 1e-8
    seed: int = 0
    input_dim: int | None = None


@dataclass
class AnnModel:
    """x1 = relu(W1 x0 + w1); x2 = softmax(W2 x1 + w2)."""

    W1: np.ndarray
    w1: np.ndarray
    W2: np.ndarray
    w2: np.ndarray
    scaler: Standardizer | None = None
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        h, d = self.W1.shape
        if self.w1.shape != (h,) or self.W2.shape[1] != h or self.w2.shape != (self.W2.shape[0],):
            raise ValueError("inconsistent network shapes")

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_units(self) -> int:
        return self.W1.shape[0]

    @property
    def n_classes(self) -> int:
        return self.W2.shape[0]

    def _prep(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} input features, got {x.shape[-1]}")
        return self.scaler(x) if self.scaler is not None else x

    def predict_proba(self, x) -> np.ndarray:
        return forward(self, self._prep(x))[-1]

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(np.atleast_2d(x)), axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "ann",
            "input_dim": self.input_dim,
            "hidden_units": self.hidden_units,
            "n_classes": self.n_classes,
            "W1": self.W1.tolist(),
            "w1": self.w1.tolist(),
            "W2": self.W2.tolist(),
            "w2": self.w2.tolist(),
            "scaler": self.scaler.to_dict() if self.scaler else None,
        }

    @classmethod
    def from_dict(cls, d) -> "AnnModel":
        m = cls(
            np.asarray(d["W1"], dtype=float),
            np.asarray(d["w1"], dtype=float),
            np.asarray(d["W2"], dtype=float),
            np.asarray(d["w2"], dtype=float),
            Standardizer.from_dict(d["scaler"]) if d.get("scaler") else None,
        )
        if m.W1.shape != (d["hidden_units"], d["input_dim"]) or m.n_classes != d["n_classes"]:
            raise ValueError("serialized shapes do not match the weights")
        return m


def softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def relu(z):
    return np.maximum(z, 0.0)


def forward(model: AnnModel, x):
    """Return (pre-activation, hidden, probabilities) for a batch or single input."""
    z1 = x @ model.W1.T + model.w1
    x1 = relu(z1)
    return z1, x1, softmax(x1 @ model.W2.T + model.w2)


def ann_forward(model: AnnModel, x) -> np.ndarray:
    """Class probabilities for one raw (unscaled) feature vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.input_dim,):
        raise ValueError(f"expected a vector of length {model.input_dim}, got shape {x.shape}")
    return forward(model, model._prep(x))[-1]


def cross_entropy(probs, onehot) -> float:
    return float(-np.mean(np.sum(onehot * np.log(np.clip(probs, 1e-300, None)), axis=1)))


def loss_and_gradients(model: AnnModel, x, onehot):
    """Mean categorical cross-entropy and its gradients (on already-scaled inputs)."""
    z1, x1, probs = forward(model, x)
    n = x.shape[0]
    delta2 = (probs - onehot) / n
    g_W2 = delta2.T @ x1
    g_w2 = delta2.sum(axis=0)
    delta1 = (delta2 @ model.W2) * (z1 > 0)
    g_W1 = delta1.T @ x
    g_w1 = delta1.sum(axis=0)
    return cross_entropy(probs, onehot), {"W1": g_W1, "w1": g_w1, "W2": g_W2, "w2": g_w2}


def init_model(input_dim: int, hidden_units: int, n_classes: int, rng) -> AnnModel:
    # Glorot-uniform weights, zero biases
    lim1 = np.sqrt(6.0 / (input_dim + hidden_units))
    lim2 = np.sqrt(6.0 / (hidden_units + n_classes))
    return AnnModel(
        rng.uniform(-lim1, lim1, size=(hidden_units, input_dim)),
        np.zeros(hidden_units),
        rng.uniform(-lim2, lim2, size=(n_classes, hidden_units)),
        np.zeros(n_classes),
    )


def ann_train(train: Dataset, config: AnnConfig | None = None, n_classes: int | None = None) -> AnnModel:
    """Mini-batch RMSprop on categorical cross-entropy.

    ``history`` on the returned model records (epoch, mean loss, accuracy).
    """
    config = config or AnnConfig()
    labels = train.labels
    n_classes = n_classes or int(labels.max()) + 1
    if len(np.unique(labels)) < 2:
        raise ValueError("training needs at least two classes")
    if config.input_dim is not None and config.input_dim != train.n_features:
        raise ValueError(
            f"config.input_dim={config.input_dim} but the dataset has {train.n_features} features"
        )
    rng = np.random.default_rng(config.seed)
    scaler = Standardizer.fit(train.features)
    x_all = scaler(train.features)
    onehot_all = np.eye(n_classes)[labels]
    model = init_model(train.n_features, config.hidden_units, n_classes, rng)
    model.scaler = scaler
    cache = {k: np.zeros_like(getattr(model, k)) for k in ("W1", "w1", "W2", "w2")}

    for epoch in range(config.epochs):
        order = rng.permutation(len(labels))
        losses = []
        for start in range(0, len(order), config.batch):
            idx = order[start : start + config.batch]
            loss, grads = loss_and_gradients(model, x_all[idx], onehot_all[idx])
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"loss became {loss} at epoch {epoch}, batch starting {start}; "
                    f"try a smaller learning rate (now {config.learning_rate})"
                )
            losses.append(loss * len(idx))
            for k, g in grads.items():
                cache[k] = config.decay * cache[k] + (1 - config.decay) * g * g
                param = getattr(model, k)
                param -= config.learning_rate * g / (np.sqrt(cache[k]) + config.epsilon)
        acc = float(np.mean(np.argmax(forward(model, x_all)[-1], axis=1) == labels))
        model.history.append((epoch + 1, sum(losses) / len(labels), acc))
        log.debug("epoch %d loss %.4f acc %.4f", epoch + 1, model.history[-1][1], acc)
    return model
