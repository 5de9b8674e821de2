"""Focal loss with exact analytic gradients.

loss = -alpha_t * (1 - p_t)^gamma * ln(p_t) with p_t the softmax probability
of the true class and alpha_t its class weight. gamma = 0 reduces to weighted
cross-entropy; larger gamma down-weights easy examples.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

P_EPS = 1e-12


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def focal_loss(
    logits: np.ndarray, label: int, gamma: float, class_weights: Sequence[float]
) -> float:
    """Single-sample focal loss; p_t is clamped to [1e-12, 1] before the log."""
    p = _softmax(np.asarray(logits, dtype=np.float64))
    pt = min(max(float(p[label]), P_EPS), 1.0)
    alpha = float(class_weights[label])
    return -alpha * (1.0 - pt) ** gamma * math.log(pt)


def focal_loss_grad(
    logits: np.ndarray, label: int, gamma: float, class_weights: Sequence[float]
) -> tuple[float, np.ndarray]:
    """(loss, d loss / d logits) for one sample."""
    z = np.asarray(logits, dtype=np.float64)
    p = _softmax(z)
    pt = min(max(float(p[label]), P_EPS), 1.0)
    alpha = float(class_weights[label])
    one_minus = 1.0 - pt
    loss = -alpha * one_minus**gamma * math.log(pt)

    if gamma == 0.0:
        dldp = -alpha / pt
    elif one_minus == 0.0:
        # lim p->1 of gamma*(1-p)^(g-1)*ln p - (1-p)^g / p vanishes for g > 0
        dldp = 0.0
    else:
        dldp = alpha * (
            gamma * one_minus ** (gamma - 1.0) * math.log(pt) - one_minus**gamma / pt
        )
    onehot = np.zeros_like(p)
    onehot[label] = 1.0
    dlogits = dldp * pt * (onehot - p)
    return loss, dlogits


def batch_focal_loss(
    logits: np.ndarray, labels: np.ndarray, gamma: float, class_weights: Sequence[float]
) -> tuple[float, np.ndarray]:
    """Mean focal loss over a batch and its gradient w.r.t. the logits."""
    n = logits.shape[0]
    dlogits = np.zeros_like(logits, dtype=np.float64)
    total = 0.0
    for i in range(n):
        loss_i, d_i = focal_loss_grad(logits[i], int(labels[i]), gamma, class_weights)
        total += loss_i
        dlogits[i] = d_i / n
    return total / n, dlogits
