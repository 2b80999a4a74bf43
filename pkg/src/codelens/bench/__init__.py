"""Datasets, splits, training, metrics and experiment orchestration."""
from .data import CodeSample, SchemaError, ingest, sample_from_json, sample_to_json, write_jsonl
from .metrics import EvalReport, SingleClassError, auc, evaluate_scores, fpr_fnr, youden_threshold
from .split import DatasetSplit, SplitError, split
from .synth import code_prior, default_oracle, synthesize_dataset
from .train import TrainConfig, TrainingDivergedError, TrainResult, train

__all__ = [
    "CodeSample",
    "DatasetSplit",
    "EvalReport",
    "SchemaError",
    "SingleClassError",
    "SplitError",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "auc",
    "code_prior",
    "default_oracle",
    "evaluate_scores",
    "fpr_fnr",
    "ingest",
    "sample_from_json",
    "sample_to_json",
    "split",
    "synthesize_dataset",
    "train",
    "write_jsonl",
    "youden_threshold",
]
