import numpy as np
import pytest

from pdmtools.exceptions import BatchSizeError, ParameterError, ShapeError
from pdmtools.layers import (INFER, TRAIN, LayerSpec, batchnorm_forward, build_layer, conv2d_forward,
                             conv2d_transpose_forward, conv_output_shape, conv_transpose_output_shape, dense_forward,
                             dropout, dropout_mask, leaky_relu)


def test_dense_examples(rng):
    np.testing.assert_array_equal(dense_forward(np.array([2.0, 3.0]), np.eye(2), np.ones(2)), [3.0, 4.0])
    b0 = np.array([0.5, -1.0, 2.0])
    np.testing.assert_array_equal(dense_forward(rng.normal(size=4), np.zeros((3, 4)), b0), b0)


def test_dense_matches_dot_products(rng):
    W = rng.normal(size=(3, 5))
    b = rng.normal(size=3)
    x = rng.normal(size=5)
    expected = [sum(W[i, j] * x[j] for j in range(5)) + b[i] for i in range(3)]
    np.testing.assert_allclose(dense_forward(x, W, b), expected, rtol=1e-12, atol=1e-12)


def test_dense_shape_mismatch():
    with pytest.raises(ShapeError):
        dense_forward(np.ones(3), np.ones((2, 4)), np.ones(2))


def test_conv_shapes():
    assert conv_output_shape(9, 4, (3, 3), (2, 1), (1, 1)) == (5, 4)
    assert conv_transpose_output_shape(5, 4, (3, 3), (2, 1), (1, 1)) == (9, 4)
    assert conv_transpose_output_shape(5, 4, (3, 3), (1, 1), (1, 1)) == (5, 4)

    y = conv2d_forward(np.zeros((9, 4, 1)), np.zeros((3, 3, 1, 64)), (2, 1), (1, 1))
    assert y.shape == (5, 4, 64)
    y = conv2d_transpose_forward(np.zeros((5, 4, 64)), np.zeros((3, 3, 1, 64)), (2, 1), (1, 1))
    assert y.shape == (9, 4, 1)


def test_numpy_integer_hyperparameters(rng):
    spec = LayerSpec("conv2d_transpose", {"filters": 1, "kernel": np.int64(3), "stride": np.array([2, 1]),
                                          "pad": np.int64(1)})
    layer = build_layer(spec, "up")
    assert layer.build((5, 4, 64)) == (9, 4, 1)
    assert layer.kernel == (3, 3) and layer.stride == (2, 1)

    x = rng.normal(size=(4, 3, 1))
    k = rng.normal(size=(3, 3, 1, 2))
    np.testing.assert_array_equal(conv2d_forward(x, k, np.int32(1), np.int64(1)), conv2d_forward(x, k, 1, 1))


def test_conv_identity_and_sum(rng):
    x = rng.normal(size=(4, 3, 1))
    np.testing.assert_array_equal(conv2d_forward(x, np.ones((1, 1, 1, 1))), x)
    x = rng.normal(size=(3, 3, 1))
    y = conv2d_forward(x, np.ones((3, 3, 1, 1)))
    assert y.shape == (1, 1, 1)
    assert y[0, 0, 0] == pytest.approx(x.sum(), abs=1e-12)


def test_conv_errors():
    with pytest.raises(ShapeError):
        conv2d_forward(np.zeros((2, 2, 1)), np.zeros((3, 3, 1, 1)))
    with pytest.raises(ShapeError):
        conv_transpose_output_shape(1, 1, (1, 1), (1, 1), (1, 1))


def test_conv_matches_direct_sum(rng):
    x = rng.normal(size=(5, 4, 2))
    k = rng.normal(size=(3, 3, 2, 3))
    y = conv2d_forward(x, k, (2, 1), (1, 1))
    xp = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    for r in range(y.shape[0]):
        for c in range(y.shape[1]):
            for o in range(3):
                expected = np.sum(xp[2 * r:2 * r + 3, c:c + 3, :] * k[:, :, :, o])
                assert y[r, c, o] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("shape,stride", [((4, 4, 2), (1, 1)), ((9, 4, 2), (2, 1))])
def test_transpose_is_adjoint_of_conv(rng, shape, stride):
    x = rng.normal(size=shape)
    k = rng.normal(size=(3, 3, 2, 3))
    conv = conv2d_forward(x, k, stride, (1, 1))
    y = rng.normal(size=conv.shape)
    back = conv2d_transpose_forward(y, k, stride, (1, 1))
    assert back.shape == x.shape
    assert abs(np.sum(conv * y) - np.sum(x * back)) < 1e-10


def test_batchnorm_train_normalises(rng):
    x = rng.normal(3.0, 2.0, size=(8, 5, 4, 3))
    y = batchnorm_forward(x, np.ones(3), np.zeros(3), TRAIN, eps=1e-12)
    np.testing.assert_allclose(y.mean(axis=(0, 1, 2)), 0.0, atol=1e-10)
    np.testing.assert_allclose(y.var(axis=(0, 1, 2)), 1.0, atol=1e-6)


def test_batchnorm_standard_batch_is_unchanged():
    x = np.array([[-1.0], [1.0]])
    y = batchnorm_forward(x, np.ones(1), np.zeros(1), TRAIN)
    np.testing.assert_allclose(y, x, atol=1e-5)


def test_batchnorm_infer_formula():
    eps = 1e-5
    y = batchnorm_forward(np.array([[0.5]]), np.array([2.0]), np.array([1.0]), INFER, eps,
                          running_mean=np.zeros(1), running_var=np.ones(1))
    assert y[0, 0] == pytest.approx(2 * 0.5 / np.sqrt(1 + eps) + 1, abs=1e-15)


def test_batchnorm_running_statistics():
    x = np.array([[1.0], [3.0]])
    mean, var = np.zeros(1), np.ones(1)
    batchnorm_forward(x, np.ones(1), np.zeros(1), TRAIN, running_mean=mean, running_var=var, momentum=0.99)
    assert mean[0] == pytest.approx(0.01 * 2.0)
    assert var[0] == pytest.approx(0.99 + 0.01 * 1.0)


def test_batchnorm_train_needs_two():
    with pytest.raises(BatchSizeError):
        batchnorm_forward(np.ones((1, 3)), np.ones(3), np.zeros(3), TRAIN)


def test_leaky_relu():
    np.testing.assert_array_equal(leaky_relu(np.array([-1.0, 2.0]), 0.3), [-0.3, 2.0])
    with pytest.raises(ParameterError):
        leaky_relu(np.ones(2), 1.0)


def test_dropout(rng):
    x = rng.normal(size=(4, 6))
    assert dropout(x, 0.3, INFER) is x
    np.testing.assert_array_equal(dropout_mask((50,), 0.3, seed=7), dropout_mask((50,), 0.3, seed=7))

    y = dropout(np.ones(100000), 0.3, TRAIN, seed=1)
    assert abs(np.mean(y == 0.0) - 0.3) < 0.01
    np.testing.assert_allclose(y[y != 0.0], 1.0 / 0.7)
    with pytest.raises(ParameterError):
        dropout(x, 1.0, TRAIN)


def test_layer_spec_validation():
    with pytest.raises(ParameterError):
        LayerSpec("lstm")
    with pytest.raises(ParameterError):
        LayerSpec("dense", {})
    assert LayerSpec("dense", {"units": 3}).kind == "dense"
