"""Numba and numpy kernel paths must agree on every operation."""

import math

import numpy as np
import pytest

from depsum import kernels


def _naive_conv1d(x, w, b):
    bsz, cin, l = x.shape
    cout, _, k = w.shape
    lout = l - k + 1
    y = np.zeros((bsz, cout, lout))
    for bi in range(bsz):
        for o in range(cout):
            for t in range(lout):
                acc = b[o]
                for c in range(cin):
                    for tap in range(k):
                        acc += w[o, c, tap] * x[bi, c, t + tap]
                y[bi, o, t] = acc
    return y


@pytest.fixture(params=sorted(kernels.available_paths()))
def path(request):
    return kernels.available_paths()[request.param]


class TestConv1d:
    def test_forward_matches_naive(self, path, rng):
        x = rng.normal(size=(2, 3, 17))
        w = rng.normal(size=(4, 3, 5))
        b = rng.normal(size=4)
        got = path["conv1d_forward"](x, w, b)
        assert got.shape == (2, 4, 13)
        np.testing.assert_allclose(got, _naive_conv1d(x, w, b), rtol=1e-12, atol=1e-12)

    def test_backward_matches_finite_differences(self, path, rng):
        x = rng.normal(size=(2, 2, 9))
        w = rng.normal(size=(3, 2, 3))
        b = rng.normal(size=3)
        dy = rng.normal(size=(2, 3, 7))
        dx, dw, db = path["conv1d_backward"](x, w, dy)
        h = 1e-6

        def loss(x_, w_, b_):
            return float((path["conv1d_forward"](x_, w_, b_) * dy).sum())

        for arr, grad in ((x, dx), (w, dw)):
            for flat in range(arr.size):
                idx = np.unravel_index(flat, arr.shape)
                orig = arr[idx]
                arr[idx] = orig + h
                lp = loss(x, w, b)
                arr[idx] = orig - h
                lm = loss(x, w, b)
                arr[idx] = orig
                np.testing.assert_allclose((lp - lm) / (2 * h), grad[idx], rtol=1e-5, atol=1e-7)
        np.testing.assert_allclose(db, dy.sum(axis=(0, 2)), rtol=1e-12)


class TestPooling:
    def test_maxpool_forward(self, path):
        x = np.array([[[1.0, 3.0, 2.0, 2.0, 5.0, 4.0, 9.0]]])  # odd length: last dropped
        y, idx = path["maxpool2_forward"](x)
        np.testing.assert_array_equal(y, [[[3.0, 2.0, 5.0]]])
        np.testing.assert_array_equal(idx, [[[1, 0, 0]]])

    def test_maxpool_tie_prefers_first(self, path):
        y, idx = path["maxpool2_forward"](np.array([[[7.0, 7.0]]]))
        assert idx[0, 0, 0] == 0

    def test_maxpool_backward_scatters(self, path):
        x = np.array([[[1.0, 3.0, 2.0, 2.0, 5.0, 4.0, 9.0]]])
        _, idx = path["maxpool2_forward"](x)
        dy = np.array([[[1.0, 2.0, 3.0]]])
        dx = path["maxpool2_backward"](dy, idx, 7)
        np.testing.assert_array_equal(dx, [[[0.0, 1.0, 2.0, 0.0, 3.0, 0.0, 0.0]]])

    def test_avgpool_round_trip(self, path, rng):
        x = rng.normal(size=(2, 3, 11))
        y = path["avgpool2_forward"](x)
        assert y.shape == (2, 3, 5)
        np.testing.assert_allclose(y, 0.5 * (x[:, :, 0:10:2] + x[:, :, 1:10:2]))
        dy = rng.normal(size=y.shape)
        dx = path["avgpool2_backward"](dy, 11)
        np.testing.assert_allclose(dx[:, :, 0:10:2], 0.5 * dy)
        np.testing.assert_allclose(dx[:, :, 1:10:2], 0.5 * dy)
        np.testing.assert_array_equal(dx[:, :, 10], 0.0)


class TestGelu:
    def test_known_values(self, path):
        x = np.array([0.0, 1.0, -1.0])
        y = path["gelu_forward"](x)
        # x * Phi(x) with the exact Gaussian CDF
        phi1 = 0.5 * (1 + math.erf(1 / math.sqrt(2)))
        np.testing.assert_allclose(y, [0.0, phi1, -(1 - phi1)], atol=1e-12)

    def test_grad_matches_finite_differences(self, path, rng):
        x = rng.normal(size=50)
        g = path["gelu_grad"](x)
        h = 1e-6
        fd = (path["gelu_forward"](x + h) - path["gelu_forward"](x - h)) / (2 * h)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-9)


@pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba unavailable")
class TestPathParity:
    """The two implementations must agree to float64 round-off."""

    def test_all_kernels_agree(self, rng):
        paths = kernels.available_paths()
        nb, npy = paths["numba"], paths["numpy"]
        x = rng.normal(size=(3, 4, 21))
        w = rng.normal(size=(5, 4, 5))
        b = rng.normal(size=5)
        dy = rng.normal(size=(3, 5, 17))

        np.testing.assert_allclose(
            nb["conv1d_forward"](x, w, b), npy["conv1d_forward"](x, w, b), rtol=1e-12, atol=1e-12
        )
        for a, bb in zip(nb["conv1d_backward"](x, w, dy), npy["conv1d_backward"](x, w, dy)):
            np.testing.assert_allclose(a, bb, rtol=1e-12, atol=1e-12)

        y_nb, i_nb = nb["maxpool2_forward"](x)
        y_np, i_np = npy["maxpool2_forward"](x)
        np.testing.assert_array_equal(y_nb, y_np)
        np.testing.assert_array_equal(i_nb, i_np)

        dyp = rng.normal(size=y_nb.shape)
        np.testing.assert_array_equal(
            nb["maxpool2_backward"](dyp, i_nb, 21), npy["maxpool2_backward"](dyp, i_np, 21)
        )
        np.testing.assert_allclose(
            nb["avgpool2_forward"](x), npy["avgpool2_forward"](x), rtol=1e-15
        )
        np.testing.assert_allclose(
            nb["avgpool2_backward"](dyp, 21), npy["avgpool2_backward"](dyp, 21), rtol=1e-15
        )

        flat = rng.normal(size=(6, 7))
        np.testing.assert_allclose(
            nb["gelu_forward"](flat), npy["gelu_forward"](flat), rtol=1e-14, atol=1e-15
        )
        np.testing.assert_allclose(
            nb["gelu_grad"](flat), npy["gelu_grad"](flat), rtol=1e-14, atol=1e-15
        )
