"""Accuracy reports, the YES/NO tasks, and model files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ann import AnnConfig, AnnModel, ann_train
from .data import Dataset, SchemaError
from .svm import SvmConfig, SvmModel, svm_train
from .tree import DtConfig, DtModel, dt_train

MODEL_FORMAT = "qcorr-model/1"
MODEL_KINDS = ("ann", "svm", "dt")
BINARY_QUESTIONS = ("entangled", "steerable", "nonlocal")


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted class
    recall: np.ndarray  # NaN for classes absent from the test set
    predictions: np.ndarray
    misclassified: np.ndarray

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "recall": [None if np.isnan(r) else float(r) for r in self.recall],
            "misclassified": self.misclassified.tolist(),
        }


def evaluate(model, test: Dataset, n_classes: int | None = None) -> EvalReport:
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    n_classes = n_classes or getattr(model, "n_classes", int(test.labels.max()) + 1)
    pred = np.asarray(model.predict(test.features), dtype=int)
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (test.labels, pred), 1)
    support = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        recall = np.where(support > 0, np.diag(confusion) / support, np.nan)
    return EvalReport(
        accuracy=float(np.trace(confusion) / len(test)),
        confusion=confusion,
        recall=recall,
        predictions=pred,
        misclassified=np.flatnonzero(pred != test.labels),
    )


def collapse_labels(labels, question: str) -> np.ndarray:
    """YES (1) / NO (0) answers: entangled is class >= II, steerable >= III, nonlocal == IV."""
    labels = np.asarray(labels)
    if question == "entangled":
        return (labels >= 1).astype(int)
    if question == "steerable":
        return (labels >= 2).astype(int)
    if question == "nonlocal":
        return (labels == 3).astype(int)
    raise ValueError(f"unknown question {question!r}; expected one of {BINARY_QUESTIONS}")


def train_model(kind: str, train: Dataset, config=None, n_classes: int | None = None):
    if kind == "ann":
        return ann_train(train, config or AnnConfig(), n_classes)
    if kind == "svm":
        return svm_train(train, config or SvmConfig(), n_classes)
    if kind == "dt":
        return dt_train(train, config or DtConfig(), n_classes)
    raise ValueError(f"unknown model kind {kind!r}")


def binary_task(kind: str, train: Dataset, test: Dataset, question: str, config=None) -> EvalReport:
    """Train ``kind`` on a YES/NO version of the labels and evaluate it."""
    btrain = train.with_labels(collapse_labels(train.labels, question))
    btest = test.with_labels(collapse_labels(test.labels, question))
    model = train_model(kind, btrain, config, n_classes=2)
    return evaluate(model, btest, n_classes=2)


def model_to_json(model) -> str:
    d = dict(model.to_dict())
    d["format"] = MODEL_FORMAT
    return json.dumps(d, sort_keys=True)


def model_from_json(text: str):
    d = json.loads(text)
    if d.get("format") != MODEL_FORMAT:
        raise SchemaError(f"model format {d.get('format')!r} is not {MODEL_FORMAT!r}")
    kind = d.get("kind")
    if kind == "ann":
        return AnnModel.from_dict(d)
    if kind == "svm":
        return SvmModel.from_dict(d)
    if kind == "dt":
        return DtModel.from_dict(d)
    raise SchemaError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(model_to_json(model) + "\n")


def load_model(path):
    return model_from_json(Path(path).read_text())
