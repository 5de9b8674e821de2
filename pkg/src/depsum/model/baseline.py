"""Binary logistic regression baseline on pooled vectors.

Full-batch gradient descent with backtracking step control, run to a 1e-8
tolerance on the loss change. L2 regularization applies to the weights only,
never the bias. Deterministic: zero init, no randomness anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSplitError
from .metrics import EvalReport, report_from_predictions
from .train import LabeledSet

LOSS_TOL = 1e-8
MAX_ITER = 20000


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float

    def decision(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.bias

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        z = self.decision(x)
        return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.predict_proba(x) >= 0.5).astype(np.int64)


def _loss(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    z = x @ w + b
    # mean(log(1 + e^z) - y*z), computed stably
    nll = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * l2 * float(w @ w)


def fit_logistic(train_set: LabeledSet, l2_strength: float = 1e-3) -> LogisticModel:
    """Gradient descent with halving/regrowing step size until the loss stalls."""
    if len(train_set) == 0:
        raise DegenerateSplitError("logistic baseline needs a non-empty train split")
    x = train_set.x
    y = train_set.y.astype(np.float64)
    w = np.zeros(x.shape[1], dtype=np.float64)
    b = 0.0
    lr = 1.0
    loss = _loss(x, y, w, b, l2_strength)
    for _ in range(MAX_ITER):
        p = LogisticModel(w, b).predict_proba(x)
        residual = p - y
        gw = x.T @ residual / len(y) + l2_strength * w
        gb = float(residual.mean())
        stepped = False
        while lr > 1e-12:
            w_new = w - lr * gw
            b_new = b - lr * gb
            loss_new = _loss(x, y, w_new, b_new, l2_strength)
            if loss_new <= loss:
                stepped = True
                break
            lr *= 0.5
        if not stepped:
            break
        delta = loss - loss_new
        w, b = w_new, b_new
        loss = loss_new
        if delta <= LOSS_TOL:
            break
        lr = min(lr * 1.25, 1e3)
    return LogisticModel(w, b)


def evaluate_logistic(model: LogisticModel, dataset: LabeledSet) -> EvalReport:
    return report_from_predictions(dataset.y, model.predict(dataset.x))


def logistic_baseline(
    train_set: LabeledSet, dev_set: LabeledSet, l2_strength: float = 1e-3
) -> EvalReport:
    """Fit on train, report on dev; the spec-facing composition."""
    if len(dev_set) == 0:
        raise DegenerateSplitError("logistic baseline needs a non-empty dev split")
    return evaluate_logistic(fit_logistic(train_set, l2_strength), dev_set)
