from .ann import AnnConfig, AnnModel, ann_forward, ann_train
from .data import Dataset, Standardizer, read_jsonl, write_jsonl
from .evaluation import (
    BINARY_QUESTIONS,
    MODEL_KINDS,
    EvalReport,
    binary_task,
    collapse_labels,
    evaluate,
    load_model,
    model_from_json,
    model_to_json,
    save_model,
    train_model,
)
from .svm import SvmConfig, SvmModel, svm_predict, svm_train
from .tree import DtConfig, DtModel, dt_predict, dt_train

__all__ = [
    "AnnConfig",
    "AnnModel",
    "ann_forward",
    "ann_train",
    "Dataset",
    "Standardizer",
    "read_jsonl",
    "write_jsonl",
    "BINARY_QUESTIONS",
    "MODEL_KINDS",
    "EvalReport",
    "binary_task",
    "collapse_labels",
    "evaluate",
    "load_model",
    "model_from_json",
    "model_to_json",
    "save_model",
    "train_model",
    "SvmConfig",
    "SvmModel",
    "svm_predict",
    "svm_train",
    "DtConfig",
    "DtModel",
    "dt_predict",
    "dt_train",
]
