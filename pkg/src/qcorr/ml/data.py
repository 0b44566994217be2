"""Labeled feature datasets and their JSON Lines form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..states import CorrelationLabel

DATASET_SCHEMA = "qcorr-dataset/1"
_ROMAN = {lab.roman: lab for lab in CorrelationLabel}


class SchemaError(ValueError):
    pass


def label_to_roman(label: int) -> str:
    return CorrelationLabel(int(label)).roman


def roman_to_label(text: str) -> CorrelationLabel:
    try:
        return _ROMAN[text]
    except KeyError:
        raise SchemaError(f"unknown class label {text!r}") from None


@dataclass
class Dataset:
    """Feature rows with integer class labels.

    ``params`` holds the nominal (p, θ) of each state when known, and ``extra``
    keeps per-row provenance (source, seed, fitted parameters, ...).
    """

    features: np.ndarray
    labels: np.ndarray
    params: np.ndarray | None = None
    extra: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.labels) == 0:
            raise ValueError("dataset is empty")
        if self.features.shape[0] != len(self.labels):
            raise ValueError("features and labels differ in length")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("dataset has non-finite features")
        if self.params is not None:
            self.params = np.asarray(self.params, dtype=float).reshape(len(self.labels), 2)
        if not self.extra:
            self.extra = [{} for _ in range(len(self.labels))]

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.features.copy(), np.asarray(labels), self.params, list(self.extra))

    def class_counts(self, n_classes: int = 4) -> np.ndarray:
        return np.bincount(self.labels, minlength=n_classes)


def write_jsonl(dataset: Dataset, path) -> None:
    """One JSON object per state: p, theta, f1, f2, label, source, seed, plus extras."""
    path = Path(path)
    lines = []
    for i in range(len(dataset)):
        row = {"schema": DATASET_SCHEMA}
        if dataset.params is not None:
            row["p"] = float(dataset.params[i, 0])
            row["theta"] = float(dataset.params[i, 1])
        for k in range(dataset.n_features):
            row[f"f{k + 1}"] = float(dataset.features[i, k])
        row["label"] = label_to_roman(dataset.labels[i])
        row.update(dataset.extra[i])
        lines.append(json.dumps(row, sort_keys=True))
    path.write_text("\n".join(lines) + "\n")


def read_jsonl(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    feats, labels, params, extra = [], [], [], []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        row = json.loads(line)
        if row.get("schema") != DATASET_SCHEMA:
            raise SchemaError(f"{path}:{lineno}: expected schema {DATASET_SCHEMA!r}")
        keys = sorted((k for k in row if k[0] == "f" and k[1:].isdigit()), key=lambda k: int(k[1:]))
        feats.append([row[k] for k in keys])
        labels.append(int(roman_to_label(row["label"])))
        if "p" in row and "theta" in row:
            params.append((row["p"], row["theta"]))
        skip = {"schema", "label", "p", "theta", *keys}
        extra.append({k: v for k, v in row.items() if k not in skip})
    return Dataset(
        np.array(feats),
        np.array(labels),
        np.array(params) if len(params) == len(labels) else None,
        extra,
    )


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x) -> "Standardizer":
        x = np.asarray(x, dtype=float)
        scale = x.std(axis=0)
        return cls(x.mean(axis=0), np.where(scale > 0, scale, 1.0))

    def __call__(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["scale"], dtype=float))
