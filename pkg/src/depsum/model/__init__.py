"""Classifier: network, focal loss, AdamW, training, metrics, and baseline."""

from .baseline import LogisticModel, evaluate_logistic, fit_logistic, logistic_baseline
from .losses import batch_focal_loss, focal_loss, focal_loss_grad
from .metrics import EvalReport, confusion_counts, report_from_confusion, report_from_predictions
from .net import (
    ConvSpec,
    FeatureExtractorConfig,
    Mode,
    ModelParams,
    backward_batch,
    expected_shapes,
    forward,
    forward_batch,
    init_params,
    load_params,
    save_params,
)
from .optim import AdamW
from .train import (
    EpochRecord,
    LabeledSet,
    TrainConfig,
    evaluate,
    predict,
    train,
    write_history_csv,
)

__all__ = [
    "AdamW",
    "ConvSpec",
    "EpochRecord",
    "EvalReport",
    "FeatureExtractorConfig",
    "LabeledSet",
    "LogisticModel",
    "Mode",
    "ModelParams",
    "TrainConfig",
    "backward_batch",
    "batch_focal_loss",
    "confusion_counts",
    "evaluate",
    "evaluate_logistic",
    "expected_shapes",
    "fit_logistic",
    "focal_loss",
    "focal_loss_grad",
    "forward",
    "forward_batch",
    "init_params",
    "load_params",
    "logistic_baseline",
    "predict",
    "report_from_confusion",
    "report_from_predictions",
    "save_params",
    "train",
    "write_history_csv",
]
