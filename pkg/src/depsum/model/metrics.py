"""Precision / recall / F1 and the 2x2 confusion matrix.

Positive class is Depressed (index 1). Undefined ratios fall back to 0, and
F1 is 0 whenever either component is, so reports are always total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    confusion: tuple[tuple[int, int], tuple[int, int]]  # rows actual, cols predicted

    @property
    def tp(self) -> int:
        return self.confusion[1][1]

    @property
    def fp(self) -> int:
        return self.confusion[0][1]

    @property
    def fn(self) -> int:
        return self.confusion[1][0]

    @property
    def tn(self) -> int:
        return self.confusion[0][0]


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[tuple[int, int], tuple[int, int]]:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    matrix = [[0, 0], [0, 0]]
    for actual, predicted in zip(y_true, y_pred, strict=True):
        matrix[actual][predicted] += 1
    return (tuple(matrix[0]), tuple(matrix[1]))


def report_from_confusion(confusion) -> EvalReport:
    (tn, fp), (fn, tp) = confusion
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision and recall else 0.0
    return EvalReport(precision, recall, f1, ((tn, fp), (fn, tp)))


def report_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> EvalReport:
    return report_from_confusion(confusion_counts(y_true, y_pred))
