"""The depression classifier network.

A fully connected expansion block (affine -> layer norm -> GELU -> dropout
per layer) feeds a single-channel sequence into two 1-d convolutions, the
first followed by batch norm and stride-2 max pooling, the second by batch
norm and stride-2 average pooling. The flattened feature map passes through
a two-layer head (the first with the same regularization stack, the second a
plain affine) to 2 logits.

Forward/backward are hand-rolled over float64 numpy with the hot conv/pool/
GELU kernels in :mod:`depsum.kernels`; gradients are exact and checked
against central finite differences in the test suite.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .. import kernels
from ..errors import DimMismatchError

LN_EPS = 1e-5
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


class Mode(Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class ConvSpec:
    kernel: int
    channels: int


@dataclass(frozen=True)
class FeatureExtractorConfig:
    input_dim: int = 768
    fc_dims: tuple[int, ...] = (1536,)
    conv1: ConvSpec = field(default_factory=lambda: ConvSpec(3, 16))
    conv2: ConvSpec = field(default_factory=lambda: ConvSpec(5, 8))
    dropout_p: float = 0.3
    head_hidden: int = 128

    def __post_init__(self) -> None:
        if not self.fc_dims:
            raise ValueError("fc_dims must be non-empty")
        for spec in (self.conv1, self.conv2):
            if spec.kernel < 1 or spec.kernel % 2 == 0:
                raise ValueError(f"conv kernels must be odd positive, got {spec.kernel}")
            if spec.channels < 1:
                raise ValueError(f"conv channels must be positive, got {spec.channels}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if min(self.seq_lengths()) < 1:
            raise ValueError(f"sequence collapses to zero length: {self.seq_lengths()}")

    def seq_lengths(self) -> tuple[int, int, int, int, int]:
        """Sequence lengths after the FC block, each conv, and each pool."""
        l0 = self.fc_dims[-1]
        l1 = l0 - self.conv1.kernel + 1
        l2 = l1 // 2
        l3 = l2 - self.conv2.kernel + 1
        l4 = l3 // 2
        return l0, l1, l2, l3, l4

    @property
    def flatten_dim(self) -> int:
        return self.conv2.channels * self.seq_lengths()[4]


def expected_shapes(config: FeatureExtractorConfig) -> dict[str, tuple[int, ...]]:
    """Every tensor the network owns, trainable and running stats alike."""
    shapes: dict[str, tuple[int, ...]] = {}
    prev = config.input_dim
    for i, dim in enumerate(config.fc_dims):
        shapes[f"fc{i}.w"] = (prev, dim)
        shapes[f"fc{i}.b"] = (dim,)
        shapes[f"fc{i}.ln.gamma"] = (dim,)
        shapes[f"fc{i}.ln.beta"] = (dim,)
        prev = dim
    c1, k1 = config.conv1.channels, config.conv1.kernel
    c2, k2 = config.conv2.channels, config.conv2.kernel
    shapes["conv1.w"] = (c1, 1, k1)
    shapes["conv1.b"] = (c1,)
    shapes["conv1.bn.gamma"] = (c1,)
    shapes["conv1.bn.beta"] = (c1,)
    shapes["conv1.bn.running_mean"] = (c1,)
    shapes["conv1.bn.running_var"] = (c1,)
    shapes["conv2.w"] = (c2, c1, k2)
    shapes["conv2.b"] = (c2,)
    shapes["conv2.bn.gamma"] = (c2,)
    shapes["conv2.bn.beta"] = (c2,)
    shapes["conv2.bn.running_mean"] = (c2,)
    shapes["conv2.bn.running_var"] = (c2,)
    shapes["head.fc.w"] = (config.flatten_dim, config.head_hidden)
    shapes["head.fc.b"] = (config.head_hidden,)
    shapes["head.ln.gamma"] = (config.head_hidden,)
    shapes["head.ln.beta"] = (config.head_hidden,)
    shapes["head.out.w"] = (config.head_hidden, 2)
    shapes["head.out.b"] = (2,)
    return shapes


def _is_running_stat(key: str) -> bool:
    return key.endswith("running_mean") or key.endswith("running_var")


@dataclass
class ModelParams:
    tensors: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.tensors.items()})

    def trainable_keys(self) -> list[str]:
        return [k for k in self.tensors if not _is_running_stat(k)]


def init_params(config: FeatureExtractorConfig, rng: np.random.Generator) -> ModelParams:
    """Scaled-normal weight init; norm scales at 1, biases and stats at 0/1.

    Draw order follows expected_shapes order, so a fixed seed pins every
    tensor bit-exactly.
    """
    tensors: dict[str, np.ndarray] = {}
    for key, shape in expected_shapes(config).items():
        if key.endswith(".w"):
            # conv w is (out, in, k) so fan-in = in * k; affine w is (in, out)
            fan_in = shape[1] * shape[2] if key.startswith("conv") else shape[0]
            tensors[key] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
        elif key.endswith("gamma") or key.endswith("running_var"):
            tensors[key] = np.ones(shape, dtype=np.float64)
        else:
            tensors[key] = np.zeros(shape, dtype=np.float64)
    return ModelParams(tensors)


# --------------------------------------------------------------- layer math

def _layernorm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return gamma * xhat + beta, (xhat, inv, gamma)


def _layernorm_backward(dy: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv, gamma = cache
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    mean_dxhat = dxhat.mean(axis=-1, keepdims=True)
    mean_dxhat_xhat = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)
    return dx, dgamma, dbeta


def _batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: Mode,
):
    """Channel-wise batch norm over (batch, length); biased variance throughout."""
    if mode is Mode.TRAIN:
        mu = x.mean(axis=(0, 2))
        var = x.var(axis=(0, 2))
        running_mean *= 1.0 - BN_MOMENTUM
        running_mean += BN_MOMENTUM * mu
        running_var *= 1.0 - BN_MOMENTUM
        running_var += BN_MOMENTUM * var
    else:
        mu = running_mean
        var = running_var
    inv = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mu[None, :, None]) * inv[None, :, None]
    y = gamma[None, :, None] * xhat + beta[None, :, None]
    return y, (xhat, inv, gamma, x.shape[0] * x.shape[2], mode)


def _batchnorm_backward(dy: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv, gamma, n, mode = cache
    dgamma = (dy * xhat).sum(axis=(0, 2))
    dbeta = dy.sum(axis=(0, 2))
    dxhat = dy * gamma[None, :, None]
    if mode is Mode.EVAL:
        dx = dxhat * inv[None, :, None]
        return dx, dgamma, dbeta
    sum_dxhat = dxhat.sum(axis=(0, 2), keepdims=True)
    sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2), keepdims=True)
    dx = (inv[None, :, None] / n) * (n * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)
    return dx, dgamma, dbeta


def _dropout_forward(x: np.ndarray, p: float, mode: Mode, rng: np.random.Generator | None):
    if mode is Mode.EVAL or p == 0.0:
        return x, None
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    scale = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * scale, scale


def _dropout_backward(dy: np.ndarray, scale) -> np.ndarray:
    return dy if scale is None else dy * scale


# ----------------------------------------------------------- forward/backward

def forward_batch(
    x: np.ndarray,
    params: ModelParams,
    config: FeatureExtractorConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict[str, Any]]:
    """Run a (batch, input_dim) matrix through the network.

    Returns (logits (batch, 2), cache-for-backward). Train mode draws dropout
    masks from ``rng`` and folds batch statistics into the running batch-norm
    stats; eval mode is a pure function of (x, params).
    """
    t = params.tensors
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != config.input_dim:
        raise DimMismatchError(
            f"expected input of dim {config.input_dim}, got shape {x.shape}"
        )
    cache: dict[str, Any] = {"x0": x, "mode": mode}

    h = x
    for i in range(len(config.fc_dims)):
        pre = h @ t[f"fc{i}.w"] + t[f"fc{i}.b"]
        normed, ln_cache = _layernorm_forward(pre, t[f"fc{i}.ln.gamma"], t[f"fc{i}.ln.beta"])
        act = kernels.gelu_forward(normed)
        out, drop_scale = _dropout_forward(act, config.dropout_p, mode, rng)
        cache[f"fc{i}"] = (h, ln_cache, normed, drop_scale)
        h = out

    seq = h[:, None, :]  # (B, 1, L0)
    y1 = kernels.conv1d_forward(seq, t["conv1.w"], t["conv1.b"])
    b1, bn1_cache = _batchnorm_forward(
        y1, t["conv1.bn.gamma"], t["conv1.bn.beta"],
        t["conv1.bn.running_mean"], t["conv1.bn.running_var"], mode,
    )
    p1, max_idx = kernels.maxpool2_forward(b1)

    y2 = kernels.conv1d_forward(p1, t["conv2.w"], t["conv2.b"])
    b2, bn2_cache = _batchnorm_forward(
        y2, t["conv2.bn.gamma"], t["conv2.bn.beta"],
        t["conv2.bn.running_mean"], t["conv2.bn.running_var"], mode,
    )
    p2 = kernels.avgpool2_forward(b2)

    flat = p2.reshape(x.shape[0], -1)
    hp = flat @ t["head.fc.w"] + t["head.fc.b"]
    hn, head_ln_cache = _layernorm_forward(hp, t["head.ln.gamma"], t["head.ln.beta"])
    ha = kernels.gelu_forward(hn)
    hd, head_drop = _dropout_forward(ha, config.dropout_p, mode, rng)
    logits = hd @ t["head.out.w"] + t["head.out.b"]

    cache.update(
        seq=seq, bn1=bn1_cache, b1_len=y1.shape[2], max_idx=max_idx, p1=p1,
        bn2=bn2_cache, b2_len=y2.shape[2], p2_shape=p2.shape, flat=flat,
        head=(hn, head_ln_cache, head_drop, hd),
    )
    return logits, cache


def forward(
    x: np.ndarray,
    params: ModelParams,
    config: FeatureExtractorConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Single-vector forward pass; returns the 2 logits."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimMismatchError(f"forward expects a 1-d vector, got shape {x.shape}")
    logits, _ = forward_batch(x[None, :], params, config, mode, rng)
    return logits[0]


def backward_batch(
    dlogits: np.ndarray,
    cache: dict[str, Any],
    params: ModelParams,
    config: FeatureExtractorConfig,
) -> dict[str, np.ndarray]:
    """Exact gradients of the cached forward pass for every trainable tensor."""
    t = params.tensors
    grads: dict[str, np.ndarray] = {}

    hn, head_ln_cache, head_drop, hd = cache["head"]
    grads["head.out.w"] = hd.T @ dlogits
    grads["head.out.b"] = dlogits.sum(axis=0)
    dhd = dlogits @ t["head.out.w"].T
    dha = _dropout_backward(dhd, head_drop)
    dhn = dha * kernels.gelu_grad(hn)
    dhp, grads["head.ln.gamma"], grads["head.ln.beta"] = _layernorm_backward(dhn, head_ln_cache)
    grads["head.fc.w"] = cache["flat"].T @ dhp
    grads["head.fc.b"] = dhp.sum(axis=0)
    dflat = dhp @ t["head.fc.w"].T

    dp2 = dflat.reshape(cache["p2_shape"])
    db2 = kernels.avgpool2_backward(dp2, cache["b2_len"])
    dy2, grads["conv2.bn.gamma"], grads["conv2.bn.beta"] = _batchnorm_backward(db2, cache["bn2"])
    dp1, grads["conv2.w"], grads["conv2.b"] = kernels.conv1d_backward(
        cache["p1"], t["conv2.w"], dy2
    )

    db1 = kernels.maxpool2_backward(dp1, cache["max_idx"], cache["b1_len"])
    dy1, grads["conv1.bn.gamma"], grads["conv1.bn.beta"] = _batchnorm_backward(db1, cache["bn1"])
    dseq, grads["conv1.w"], grads["conv1.b"] = kernels.conv1d_backward(
        cache["seq"], t["conv1.w"], dy1
    )

    dh = dseq[:, 0, :]
    for i in reversed(range(len(config.fc_dims))):
        h_in, ln_cache, normed, drop_scale = cache[f"fc{i}"]
        dact = _dropout_backward(dh, drop_scale)
        dnormed = dact * kernels.gelu_grad(normed)
        dpre, grads[f"fc{i}.ln.gamma"], grads[f"fc{i}.ln.beta"] = _layernorm_backward(
            dnormed, ln_cache
        )
        grads[f"fc{i}.w"] = h_in.T @ dpre
        grads[f"fc{i}.b"] = dpre.sum(axis=0)
        dh = dpre @ t[f"fc{i}.w"].T
    return grads


# --------------------------------------------------------------- persistence

def save_params(path: str | Path, params: ModelParams, config: FeatureExtractorConfig) -> None:
    """Single-file .npz: every named tensor plus a JSON config header."""
    header = json.dumps(dataclasses.asdict(config), sort_keys=True)
    np.savez(path, __config__=np.frombuffer(header.encode("utf-8"), dtype=np.uint8),
             **params.tensors)


def load_params(path: str | Path) -> tuple[ModelParams, FeatureExtractorConfig]:
    """Load and validate a params file; shapes must match the embedded config."""
    with np.load(path) as data:
        header = json.loads(bytes(data["__config__"]).decode("utf-8"))
        config = FeatureExtractorConfig(
            input_dim=header["input_dim"],
            fc_dims=tuple(header["fc_dims"]),
            conv1=ConvSpec(**header["conv1"]),
            conv2=ConvSpec(**header["conv2"]),
            dropout_p=header["dropout_p"],
            head_hidden=header["head_hidden"],
        )
        tensors = {k: data[k].astype(np.float64) for k in data.files if k != "__config__"}
    shapes = expected_shapes(config)
    if set(tensors) != set(shapes):
        missing = set(shapes) ^ set(tensors)
        raise DimMismatchError(f"params file tensor set mismatch: {sorted(missing)}")
    for key, shape in shapes.items():
        if tensors[key].shape != shape:
            raise DimMismatchError(
                f"tensor {key} has shape {tensors[key].shape}, config expects {shape}"
            )
    return ModelParams(tensors), config
