"""Hot numeric kernels: valid 1-d convolution, stride-2 pooling, exact GELU.

Every kernel ships in two mathematically equivalent flavors: a numba
``@njit`` loop version and a pure-numpy version. The numba path is the
default whenever numba imports; set ``DEPSUM_NO_NUMBA=1`` to force the numpy
fallback (useful for debugging and for the benchmark baseline). Both paths
are pinned to float64.

``benchmarks/bench_kernels.py`` times the two paths side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import erf as _erf

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and os.environ.get("DEPSUM_NO_NUMBA", "0").lower() not in (
    "1",
    "true",
    "yes",
)


# ----------------------------------------------------------------- numpy path

def _conv1d_forward_np(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x (B,Cin,L), w (Cout,Cin,K), b (Cout,) -> y (B,Cout,L-K+1)."""
    k = w.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)
    y = np.einsum("bclk,ock->bol", windows, w, optimize=True)
    return y + b[None, :, None]


def _conv1d_backward_np(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = w.shape[2]
    x_windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=2)
    dw = np.einsum("bclk,bol->ock", x_windows, dy, optimize=True)
    db = dy.sum(axis=(0, 2))
    # dx is the full correlation of dy with the tap-reversed weights.
    dy_pad = np.pad(dy, ((0, 0), (0, 0), (k - 1, k - 1)))
    dy_windows = np.lib.stride_tricks.sliding_window_view(dy_pad, k, axis=2)
    dx = np.einsum("bolk,ock->bcl", dy_windows, w[:, :, ::-1], optimize=True)
    return dx, dw, db


def _maxpool2_forward_np(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kernel-2 stride-2 max pool; trailing odd element is dropped."""
    b, c, l = x.shape
    lp = l // 2
    pairs = x[:, :, : 2 * lp].reshape(b, c, lp, 2)
    idx = pairs.argmax(axis=3).astype(np.int64)
    y = np.take_along_axis(pairs, idx[..., None], axis=3)[..., 0]
    return y, idx


def _maxpool2_backward_np(dy: np.ndarray, idx: np.ndarray, l_in: int) -> np.ndarray:
    b, c, lp = dy.shape
    pairs = np.zeros((b, c, lp, 2), dtype=np.float64)
    np.put_along_axis(pairs, idx[..., None], dy[..., None], axis=3)
    dx = np.zeros((b, c, l_in), dtype=np.float64)
    dx[:, :, : 2 * lp] = pairs.reshape(b, c, 2 * lp)
    return dx


def _avgpool2_forward_np(x: np.ndarray) -> np.ndarray:
    lp = x.shape[2] // 2
    return 0.5 * (x[:, :, 0 : 2 * lp : 2] + x[:, :, 1 : 2 * lp : 2])


def _avgpool2_backward_np(dy: np.ndarray, l_in: int) -> np.ndarray:
    b, c, lp = dy.shape
    dx = np.zeros((b, c, l_in), dtype=np.float64)
    dx[:, :, 0 : 2 * lp : 2] = 0.5 * dy
    dx[:, :, 1 : 2 * lp : 2] = 0.5 * dy
    return dx


def _gelu_forward_np(x: np.ndarray) -> np.ndarray:
    """Exact Gaussian-CDF GELU: x * Phi(x)."""
    return 0.5 * x * (1.0 + _erf(x * _INV_SQRT2))


def _gelu_grad_np(x: np.ndarray) -> np.ndarray:
    """d/dx GELU = Phi(x) + x * pdf(x)."""
    return 0.5 * (1.0 + _erf(x * _INV_SQRT2)) + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


# ----------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _conv1d_forward_nb(x, w, b):
        bsz, cin, l = x.shape
        cout, _, k = w.shape
        lout = l - k + 1
        y = np.empty((bsz, cout, lout), dtype=np.float64)
        for bi in range(bsz):
            for o in range(cout):
                bias = b[o]
                for t in range(lout):
                    y[bi, o, t] = bias
                for c in range(cin):
                    for tap in range(k):
                        wv = w[o, c, tap]
                        for t in range(lout):
                            y[bi, o, t] += wv * x[bi, c, t + tap]
        return y

    @njit(cache=True)
    def _conv1d_backward_nb(x, w, dy):
        bsz, cin, l = x.shape
        cout, _, k = w.shape
        lout = l - k + 1
        dx = np.zeros((bsz, cin, l), dtype=np.float64)
        dw = np.zeros((cout, cin, k), dtype=np.float64)
        db = np.zeros(cout, dtype=np.float64)
        for bi in range(bsz):
            for o in range(cout):
                for t in range(lout):
                    db[o] += dy[bi, o, t]
                for c in range(cin):
                    for tap in range(k):
                        wv = w[o, c, tap]
                        acc = 0.0
                        for t in range(lout):
                            g = dy[bi, o, t]
                            acc += g * x[bi, c, t + tap]
                            dx[bi, c, t + tap] += g * wv
                        dw[o, c, tap] += acc
        return dx, dw, db

    @njit(cache=True)
    def _maxpool2_forward_nb(x):
        bsz, c, l = x.shape
        lp = l // 2
        y = np.empty((bsz, c, lp), dtype=np.float64)
        idx = np.empty((bsz, c, lp), dtype=np.int64)
        for bi in range(bsz):
            for ci in range(c):
                for p in range(lp):
                    a = x[bi, ci, 2 * p]
                    b = x[bi, ci, 2 * p + 1]
                    # strict > keeps the first element on ties, like argmax
                    if b > a:
                        y[bi, ci, p] = b
                        idx[bi, ci, p] = 1
                    else:
                        y[bi, ci, p] = a
                        idx[bi, ci, p] = 0
        return y, idx

    @njit(cache=True)
    def _maxpool2_backward_nb(dy, idx, l_in):
        bsz, c, lp = dy.shape
        dx = np.zeros((bsz, c, l_in), dtype=np.float64)
        for bi in range(bsz):
            for ci in range(c):
                for p in range(lp):
                    dx[bi, ci, 2 * p + idx[bi, ci, p]] = dy[bi, ci, p]
        return dx

    @njit(cache=True)
    def _avgpool2_forward_nb(x):
        bsz, c, l = x.shape
        lp = l // 2
        y = np.empty((bsz, c, lp), dtype=np.float64)
        for bi in range(bsz):
            for ci in range(c):
                for p in range(lp):
                    y[bi, ci, p] = 0.5 * (x[bi, ci, 2 * p] + x[bi, ci, 2 * p + 1])
        return y

    @njit(cache=True)
    def _avgpool2_backward_nb(dy, l_in):
        bsz, c, lp = dy.shape
        dx = np.zeros((bsz, c, l_in), dtype=np.float64)
        for bi in range(bsz):
            for ci in range(c):
                for p in range(lp):
                    half = 0.5 * dy[bi, ci, p]
                    dx[bi, ci, 2 * p] = half
                    dx[bi, ci, 2 * p + 1] = half
        return dx

    @njit(cache=True)
    def _gelu_forward_flat_nb(x):
        y = np.empty_like(x)
        for i in range(x.size):
            y[i] = 0.5 * x[i] * (1.0 + math.erf(x[i] * _INV_SQRT2))
        return y

    @njit(cache=True)
    def _gelu_grad_flat_nb(x):
        g = np.empty_like(x)
        for i in range(x.size):
            xi = x[i]
            g[i] = 0.5 * (1.0 + math.erf(xi * _INV_SQRT2)) + xi * math.exp(
                -0.5 * xi * xi
            ) * _INV_SQRT_2PI
        return g

    def _gelu_forward_nb(x: np.ndarray) -> np.ndarray:
        return _gelu_forward_flat_nb(np.ascontiguousarray(x).ravel()).reshape(x.shape)

    def _gelu_grad_nb(x: np.ndarray) -> np.ndarray:
        return _gelu_grad_flat_nb(np.ascontiguousarray(x).ravel()).reshape(x.shape)


_NUMPY_PATH = {
    "conv1d_forward": _conv1d_forward_np,
    "conv1d_backward": _conv1d_backward_np,
    "maxpool2_forward": _maxpool2_forward_np,
    "maxpool2_backward": _maxpool2_backward_np,
    "avgpool2_forward": _avgpool2_forward_np,
    "avgpool2_backward": _avgpool2_backward_np,
    "gelu_forward": _gelu_forward_np,
    "gelu_grad": _gelu_grad_np,
}

if HAVE_NUMBA:
    _NUMBA_PATH = {
        "conv1d_forward": _conv1d_forward_nb,
        "conv1d_backward": _conv1d_backward_nb,
        "maxpool2_forward": _maxpool2_forward_nb,
        "maxpool2_backward": _maxpool2_backward_nb,
        "avgpool2_forward": _avgpool2_forward_nb,
        "avgpool2_backward": _avgpool2_backward_nb,
        "gelu_forward": _gelu_forward_nb,
        "gelu_grad": _gelu_grad_nb,
    }


def available_paths() -> dict[str, dict]:
    """Kernel tables by path name, for parity tests and the benchmark."""
    paths = {"numpy": _NUMPY_PATH}
    if HAVE_NUMBA:
        paths["numba"] = _NUMBA_PATH
    return paths


ACTIVE_PATH = "numba" if NUMBA_ENABLED else "numpy"
_ACTIVE = _NUMBA_PATH if NUMBA_ENABLED else _NUMPY_PATH

conv1d_forward = _ACTIVE["conv1d_forward"]
conv1d_backward = _ACTIVE["conv1d_backward"]
maxpool2_forward = _ACTIVE["maxpool2_forward"]
maxpool2_backward = _ACTIVE["maxpool2_backward"]
avgpool2_forward = _ACTIVE["avgpool2_forward"]
avgpool2_backward = _ACTIVE["avgpool2_backward"]
gelu_forward = _ACTIVE["gelu_forward"]
gelu_grad = _ACTIVE["gelu_grad"]
