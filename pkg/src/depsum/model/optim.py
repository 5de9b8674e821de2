"""Adaptive-moment optimizer with decoupled weight decay.

Decay multiplies the weights directly (theta *= 1 - lr*wd) instead of being
folded into the gradient, so it stays independent of the adaptive step size.
"""

from __future__ import annotations

import numpy as np


class AdamW:
    def __init__(
        self,
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 1e-2,
    ):
        if lr < 0 or weight_decay < 0:
            raise ValueError("lr and weight_decay must be non-negative")
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """Update tensors in place; iteration order is sorted for determinism."""
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for key in sorted(grads):
            g = grads[key]
            if key not in self._m:
                self._m[key] = np.zeros_like(g)
                self._v[key] = np.zeros_like(g)
            m = self._m[key]
            v = self._v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            theta = tensors[key]
            theta *= 1.0 - self.lr * self.weight_decay
            theta -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
