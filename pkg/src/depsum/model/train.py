"""Training loop: seeded batching, focal loss, AdamW, best-dev-F1 selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from ..errors import DegenerateSplitError
from .losses import batch_focal_loss
from .metrics import EvalReport, report_from_predictions
from .net import FeatureExtractorConfig, Mode, ModelParams, backward_batch, forward_batch, init_params
from .optim import AdamW


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 2.0
    class_weights: tuple[float, float] = (1.4, 3.3)  # index 1 = depressed (minority)
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2
    epochs: int = 100
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if any(w <= 0 for w in self.class_weights):
            raise ValueError(f"class weights must be positive, got {self.class_weights}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")


@dataclass(frozen=True)
class LabeledSet:
    """Pooled document vectors with binary labels."""

    x: np.ndarray  # (n, dim) float64
    y: np.ndarray  # (n,) int, 1 = depressed

    def __post_init__(self) -> None:
        if self.x.ndim != 2 or self.y.shape != (self.x.shape[0],):
            raise ValueError(f"inconsistent set shapes: {self.x.shape} / {self.y.shape}")

    def __len__(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_f1: float


def predict(params: ModelParams, config: FeatureExtractorConfig, x: np.ndarray) -> np.ndarray:
    """Argmax class per row, eval mode (running-stat batch norm, no dropout)."""
    logits, _ = forward_batch(x, params, config, Mode.EVAL)
    return logits.argmax(axis=1)


def evaluate(params: ModelParams, config: FeatureExtractorConfig, dataset: LabeledSet) -> EvalReport:
    return report_from_predictions(dataset.y, predict(params, config, dataset.x))


def train(
    train_set: LabeledSet,
    dev_set: LabeledSet,
    config: FeatureExtractorConfig,
    train_config: TrainConfig,
) -> tuple[ModelParams, list[EpochRecord]]:
    """Run the full schedule and return the best-dev-F1 checkpoint + history.

    Fully deterministic for a fixed seed: one root Generator drives init,
    shuffling, and dropout in a fixed order, and the per-batch reduction
    order never changes.
    """
    if len(train_set) == 0 or len(dev_set) == 0:
        raise DegenerateSplitError("train and dev splits must be non-empty")
    if len(np.unique(train_set.y)) < 2:
        raise DegenerateSplitError("train split must contain both classes")

    rng = np.random.default_rng(train_config.seed)
    params = init_params(config, rng)
    opt = AdamW(
        lr=train_config.learning_rate,
        weight_decay=train_config.weight_decay,
    )

    best_params = params.copy()
    best_f1 = -1.0
    history: list[EpochRecord] = []
    n = len(train_set)

    for epoch in range(1, train_config.epochs + 1):
        order = rng.permutation(n)
        losses: list[float] = []
        for start in range(0, n, train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            xb = train_set.x[idx]
            yb = train_set.y[idx]
            logits, cache = forward_batch(xb, params, config, Mode.TRAIN, rng)
            loss, dlogits = batch_focal_loss(
                logits, yb, train_config.gamma, train_config.class_weights
            )
            grads = backward_batch(dlogits, cache, params, config)
            opt.step(params.tensors, grads)
            losses.append(loss)
        train_loss = float(np.mean(losses))
        dev_f1 = evaluate(params, config, dev_set).f1
        history.append(EpochRecord(epoch, train_loss, dev_f1))
        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_params = params.copy()
    return best_params, history


def write_history_csv(out: IO[str], history: Sequence[EpochRecord]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["epoch", "train_loss", "dev_f1"])
    for record in history:
        writer.writerow([record.epoch, repr(record.train_loss), repr(record.dev_f1)])
