"""CART classification tree with Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

_GINI_EPS = 1e-12


@dataclass
class DtConfig:
    max_depth: int = 4


@dataclass
class Node:
    counts: np.ndarray
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.counts))

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_dict(self) -> dict:
        d = {"counts": self.counts.tolist()}
        if not self.is_leaf:
            d.update(
                feature=self.feature,
                threshold=self.threshold,
                left=self.left.to_dict(),
                right=self.right.to_dict(),
            )
        return d

    @classmethod
    def from_dict(cls, d) -> "Node":
        node = cls(np.asarray(d["counts"], dtype=int))
        if "feature" in d:
            node.feature = int(d["feature"])
            node.threshold = float(d["threshold"])
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    q = counts / n
    return float(1.0 - np.sum(q * q))


def best_split(x: np.ndarray, y: np.ndarray, n_classes: int):
    """Exhaustive search over midpoints of sorted unique values.

    Returns ``(feature, threshold, weighted_gini)`` or ``None`` when no feature
    has two distinct values. Samples with ``x[:, f] <= threshold`` go left.
    Ties keep the earlier feature, then the smaller threshold.
    """
    n = len(y)
    best = None
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        onehot = np.eye(n_classes)[y[order]]
        left = np.cumsum(onehot, axis=0)[:-1]
        right = left[-1] + onehot[-1] - left
        n_left = np.arange(1, n)
        n_right = n - n_left
        valid = xs[1:] > xs[:-1]
        if not np.any(valid):
            continue
        g_left = 1.0 - np.sum(left * left, axis=1) / (n_left * n_left)
        g_right = 1.0 - np.sum(right * right, axis=1) / (n_right * n_right)
        weighted = (n_left * g_left + n_right * g_right) / n
        weighted = np.where(valid, weighted, np.inf)
        k = int(np.argmin(weighted))  # first minimum: smallest threshold
        if best is None or weighted[k] < best[2] - _GINI_EPS:
            best = (f, 0.5 * (xs[k] + xs[k + 1]), float(weighted[k]))
    return best


def _grow(x, y, n_classes, depth, max_depth) -> Node:
    node = Node(np.bincount(y, minlength=n_classes))
    if depth >= max_depth or gini(node.counts) == 0.0:
        return node
    split = best_split(x, y, n_classes)
    if split is None:
        return node
    f, thr, _ = split
    mask = x[:, f] <= thr
    node.feature, node.threshold = f, float(thr)
    node.left = _grow(x[mask], y[mask], n_classes, depth + 1, max_depth)
    node.right = _grow(x[~mask], y[~mask], n_classes, depth + 1, max_depth)
    return node


@dataclass
class DtModel:
    root: Node
    max_depth: int
    n_classes: int
    n_features: int

    def predict_one(self, x) -> int:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.prediction

    def predict(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {x.shape[1]}")
        return np.array([self.predict_one(row) for row in x], dtype=int)

    @property
    def depth(self) -> int:
        return self.root.depth()

    def thresholds(self):
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                out.append((node.feature, node.threshold))
                stack += [node.left, node.right]
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "dt",
            "max_depth": self.max_depth,
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "DtModel":
        return cls(Node.from_dict(d["root"]), d["max_depth"], d["n_classes"], d["n_features"])


def dt_train(train: Dataset, config: DtConfig | None = None, n_classes: int | None = None) -> DtModel:
    config = config or DtConfig()
    if config.max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    n_classes = n_classes or int(train.labels.max()) + 1
    root = _grow(train.features, train.labels, n_classes, 0, config.max_depth)
    return DtModel(root, config.max_depth, n_classes, train.n_features)


def dt_predict(model: DtModel, x) -> int:
    return model.predict_one(np.asarray(x, dtype=float))
