"""
Differentiable layers of the windowed GAN.

Every layer kind has a pure forward function and a matching backward function that recomputes
what it needs from the forward inputs. Thin layer classes wrap them so that a Network can chain
them, own their parameters and cache their inputs between the two passes.

Arrays are float64 and batch-first; feature maps are channels-last (batch, height, width, channels).
Conv2DTranspose kernels are stored as (kh, kw, out_channels, in_channels), i.e. the same array a
Conv2D going the opposite way would use, so the transpose is the exact adjoint of the convolution.

Date: Oct 2026

"""

import math
import numbers
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from pdmtools.exceptions import BatchSizeError, ParameterError, ShapeError

LAYER_KINDS = ("dense", "conv2d", "conv2d_transpose", "batchnorm", "leaky_relu", "tanh", "sigmoid",
               "dropout", "reshape", "flatten")

TRAIN = "train"
INFER = "infer"


def _check_mode(mode):
    if mode not in (TRAIN, INFER):
        raise ParameterError("mode must be 'train' or 'infer', got %r" % (mode,))


def _pair(value, name):
    if isinstance(value, numbers.Integral):
        value = (value, value)
    value = tuple(int(v) for v in value)
    if len(value) != 2:
        raise ParameterError("%s must be an int or a pair, got %r" % (name, value))
    return value


# ----------------------------------------------------------------------------------------------
# dense

def dense_forward(x, W, b):
    """
    y = W x + b for a single vector or a batch of row vectors.

    :param x: (in,) or (batch, in)
    :param W: (out, in)
    :param b: (out,)
    :return: (out,) or (batch, out)
    """
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2 or b.shape != (W.shape[0],) or x.shape[-1] != W.shape[1]:
        raise ShapeError("dense: x %s, W %s, b %s do not align" % (x.shape, W.shape, b.shape))
    return x @ W.T + b


def dense_backward(dy, x, W):
    """
    :return: dx, dW, db
    """
    x2 = np.atleast_2d(x)
    dy2 = np.atleast_2d(dy)
    dx = dy @ W
    return dx, dy2.T @ x2, dy2.sum(axis=0)


# ----------------------------------------------------------------------------------------------
# convolutions

def conv_output_shape(height, width, kernel, stride, pad):
    """
    H' = floor((H + 2ph - kh) / sh) + 1, W' likewise.
    """
    (kh, kw), (sh, sw), (ph, pw) = kernel, stride, pad
    if height + 2 * ph < kh or width + 2 * pw < kw:
        raise ShapeError("conv2d: kernel %dx%d larger than padded input %dx%d"
                         % (kh, kw, height + 2 * ph, width + 2 * pw))
    return (height + 2 * ph - kh) // sh + 1, (width + 2 * pw - kw) // sw + 1


def conv_transpose_output_shape(height, width, kernel, stride, pad):
    """
    H' = (H - 1) sh - 2ph + kh, W' likewise.
    """
    (kh, kw), (sh, sw), (ph, pw) = kernel, stride, pad
    out_h = (height - 1) * sh - 2 * ph + kh
    out_w = (width - 1) * sw - 2 * pw + kw
    if out_h < 1 or out_w < 1:
        raise ShapeError("conv2d_transpose: computed output %dx%d is not positive" % (out_h, out_w))
    return out_h, out_w


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        return x[None], True
    if x.ndim != 4:
        raise ShapeError("feature maps must be HxWxC or BxHxWxC, got shape %s" % (x.shape,))
    return x, False


def conv2d_forward(x, kernels, stride=(1, 1), pad=(0, 0), bias=None):
    """
    Zero-padded 2-D cross-correlation.

    :param x: H x W x C_in (or batched)
    :param kernels: kh x kw x C_in x C_out
    :param stride: (sh, sw)
    :param pad: (ph, pw)
    :param bias: optional (C_out,)
    :return: H' x W' x C_out (or batched)
    """
    x4, single = _as_batch(x)
    stride, pad = _pair(stride, "stride"), _pair(pad, "pad")
    kh, kw, c_in, c_out = kernels.shape
    if x4.shape[3] != c_in:
        raise ShapeError("conv2d: input has %d channels, kernels expect %d" % (x4.shape[3], c_in))
    out_h, out_w = conv_output_shape(x4.shape[1], x4.shape[2], (kh, kw), stride, pad)
    (sh, sw), (ph, pw) = stride, pad

    xp = np.pad(x4, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    out = np.zeros((x4.shape[0], out_h, out_w, c_out))
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, i:i + sh * (out_h - 1) + 1:sh, j:j + sw * (out_w - 1) + 1:sw, :]
            out += patch @ kernels[i, j]
    if bias is not None:
        out += bias
    return out[0] if single else out


def conv2d_backward(dy, x, kernels, stride=(1, 1), pad=(0, 0)):
    """
    :return: dx, dkernels, dbias
    """
    x4, single = _as_batch(x)
    dy4, _ = _as_batch(dy)
    (sh, sw), (ph, pw) = _pair(stride, "stride"), _pair(pad, "pad")
    kh, kw = kernels.shape[:2]
    out_h, out_w = dy4.shape[1:3]

    xp = np.pad(x4, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    dxp = np.zeros_like(xp)
    dk = np.zeros_like(kernels)
    for i in range(kh):
        for j in range(kw):
            rows = slice(i, i + sh * (out_h - 1) + 1, sh)
            cols = slice(j, j + sw * (out_w - 1) + 1, sw)
            dk[i, j] = np.tensordot(xp[:, rows, cols, :], dy4, axes=([0, 1, 2], [0, 1, 2]))
            dxp[:, rows, cols, :] += dy4 @ kernels[i, j].T

    dx = dxp[:, ph:ph + x4.shape[1], pw:pw + x4.shape[2], :]
    return (dx[0] if single else dx), dk, dy4.sum(axis=(0, 1, 2))


def conv2d_transpose_forward(x, kernels, stride=(1, 1), pad=(0, 0), bias=None):
    """
    Transposed convolution, the linear adjoint of conv2d_forward with the same kernels.

    :param x: H x W x C_in (or batched)
    :param kernels: kh x kw x C_out x C_in
    :param stride: (sh, sw)
    :param pad: (ph, pw) cropped from the full output
    :param bias: optional (C_out,)
    :return: H' x W' x C_out with H' = (H - 1) sh - 2ph + kh
    """
    x4, single = _as_batch(x)
    stride, pad = _pair(stride, "stride"), _pair(pad, "pad")
    kh, kw, c_out, c_in = kernels.shape
    if x4.shape[3] != c_in:
        raise ShapeError("conv2d_transpose: input has %d channels, kernels expect %d" % (x4.shape[3], c_in))
    batch, height, width = x4.shape[:3]
    out_h, out_w = conv_transpose_output_shape(height, width, (kh, kw), stride, pad)
    (sh, sw), (ph, pw) = stride, pad

    full = np.zeros((batch, (height - 1) * sh + kh, (width - 1) * sw + kw, c_out))
    for i in range(kh):
        for j in range(kw):
            full[:, i:i + sh * (height - 1) + 1:sh, j:j + sw * (width - 1) + 1:sw, :] += x4 @ kernels[i, j].T
    out = full[:, ph:ph + out_h, pw:pw + out_w, :]
    if bias is not None:
        out = out + bias
    return out[0] if single else out


def conv2d_transpose_backward(dy, x, kernels, stride=(1, 1), pad=(0, 0)):
    """
    :return: dx, dkernels, dbias
    """
    x4, single = _as_batch(x)
    dy4, _ = _as_batch(dy)
    (sh, sw), (ph, pw) = _pair(stride, "stride"), _pair(pad, "pad")
    kh, kw = kernels.shape[:2]
    height, width = x4.shape[1:3]

    full_h, full_w = (height - 1) * sh + kh, (width - 1) * sw + kw
    dfull = np.zeros((dy4.shape[0], full_h, full_w, dy4.shape[3]))
    dfull[:, ph:ph + dy4.shape[1], pw:pw + dy4.shape[2], :] = dy4

    dx = np.zeros_like(x4)
    dk = np.zeros_like(kernels)
    for i in range(kh):
        for j in range(kw):
            g = dfull[:, i:i + sh * (height - 1) + 1:sh, j:j + sw * (width - 1) + 1:sw, :]
            dx += g @ kernels[i, j]
            dk[i, j] = np.tensordot(g, x4, axes=([0, 1, 2], [0, 1, 2]))
    return (dx[0] if single else dx), dk, dy4.sum(axis=(0, 1, 2))


# ----------------------------------------------------------------------------------------------
# batch normalisation

def _bn_axes(x):
    return tuple(range(x.ndim - 1))


def batchnorm_forward(x, gamma, beta, mode=TRAIN, eps=1e-5, running_mean=None, running_var=None,
                      momentum=0.99):
    """
    Per-channel (last axis) batch normalisation followed by scale and shift.

    In train mode the batch statistics are used and, when given, running_mean and running_var are
    updated in place as running = momentum * running + (1 - momentum) * batch.
    In infer mode the running statistics are used.

    :return: array of the same shape as x
    """
    _check_mode(mode)
    x = np.asarray(x, dtype=np.float64)
    if mode == TRAIN:
        if x.shape[0] < 2:
            raise BatchSizeError("batch normalisation in train mode needs a batch of at least 2, got %d"
                                 % x.shape[0])
        axes = _bn_axes(x)
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        if running_mean is not None:
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mean
        if running_var is not None:
            running_var *= momentum
            running_var += (1.0 - momentum) * var
    else:
        if running_mean is None or running_var is None:
            raise ParameterError("infer-mode batch normalisation needs running statistics")
        mean, var = running_mean, running_var
    return gamma * (x - mean) / np.sqrt(var + eps) + beta


def batchnorm_backward(dy, x, gamma, mode=TRAIN, eps=1e-5, running_mean=None, running_var=None):
    """
    :return: dx, dgamma, dbeta
    """
    axes = _bn_axes(x)
    if mode == TRAIN:
        count = x.size // x.shape[-1]
        inv_std = 1.0 / np.sqrt(x.var(axis=axes) + eps)
        x_hat = (x - x.mean(axis=axes)) * inv_std
        dx_hat = dy * gamma
        dx = (inv_std / count) * (count * dx_hat - dx_hat.sum(axis=axes) - x_hat * (dx_hat * x_hat).sum(axis=axes))
    else:
        inv_std = 1.0 / np.sqrt(running_var + eps)
        x_hat = (x - running_mean) * inv_std
        dx = dy * gamma * inv_std
    return dx, (dy * x_hat).sum(axis=axes), dy.sum(axis=axes)


# ----------------------------------------------------------------------------------------------
# activations

def leaky_relu(x, slope=0.3):
    if not 0.0 < slope < 1.0:
        raise ParameterError("leaky relu slope must lie in (0, 1), got %r" % (slope,))
    return np.where(x > 0, x, slope * x)


def leaky_relu_backward(dy, x, slope=0.3):
    return dy * np.where(x > 0, 1.0, slope)


def tanh(x):
    return np.tanh(x)


def tanh_backward(dy, y):
    return dy * (1.0 - y * y)


def sigmoid(x):
    return expit(x)


def sigmoid_backward(dy, y):
    return dy * y * (1.0 - y)


def dropout_mask(shape, rate, seed):
    """
    Survivor mask scaled by 1 / (1 - rate), reproducible for a given seed.
    """
    if not 0.0 <= rate < 1.0:
        raise ParameterError("dropout rate must lie in [0, 1), got %r" % (rate,))
    keep = np.random.default_rng(seed).random(shape) >= rate
    return keep / (1.0 - rate)


def dropout(x, rate=0.3, mode=TRAIN, seed=0):
    """
    Identity in infer mode; in train mode every element is zeroed with probability rate and the
    survivors are scaled by 1 / (1 - rate).
    """
    _check_mode(mode)
    if not 0.0 <= rate < 1.0:
        raise ParameterError("dropout rate must lie in [0, 1), got %r" % (rate,))
    if mode == INFER or rate == 0.0:
        return x
    return x * dropout_mask(np.shape(x), rate, seed)


# ----------------------------------------------------------------------------------------------
# layer specs and classes

_REQUIRED = {
    "dense": ("units",),
    "conv2d": ("filters",),
    "conv2d_transpose": ("filters",),
    "batchnorm": (),
    "leaky_relu": (),
    "tanh": (),
    "sigmoid": (),
    "dropout": ("rate",),
    "reshape": ("target_shape",),
    "flatten": (),
}


@dataclass(frozen=True)
class LayerSpec:
    """
    Declarative description of one layer.

    hyperparams by kind: dense units; conv2d / conv2d_transpose filters, kernel, stride, pad;
    batchnorm momentum, eps; leaky_relu slope; dropout rate; reshape target_shape.
    """
    kind: str
    hyperparams: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ParameterError("unknown layer kind %r" % (self.kind,))
        for key in _REQUIRED[self.kind]:
            if key not in self.hyperparams:
                raise ParameterError("%s layer needs hyperparameter '%s'" % (self.kind, key))


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """
    Base class. Subclasses declare their parameters in init_params / init_state and implement
    forward and backward; parameters live in the owning network's ParameterStore under
    "<prefix>.<local name>".
    """
    has_params = False

    def __init__(self, spec, prefix):
        self.spec = spec
        self.prefix = prefix
        self.input_shape = None
        self._cache = None

    def pname(self, local):
        return self.prefix + "." + local

    def build(self, input_shape):
        self.input_shape = tuple(input_shape)
        return self.output_shape(self.input_shape)

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def init_params(self, rng):
        return {}

    def init_state(self):
        return {}

    def forward(self, x, params, mode, seed):
        raise NotImplementedError

    def backward(self, dy, params):
        """
        :return: (dx, dict of parameter name -> gradient)
        """
        raise NotImplementedError


class Dense(Layer):
    has_params = True

    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        self.units = int(spec.hyperparams["units"])
        if self.units < 1:
            raise ParameterError("dense units must be positive")

    def output_shape(self, input_shape):
        if len(input_shape) != 1:
            raise ShapeError("dense layer %s needs a flat input, got %s" % (self.prefix, input_shape))
        return (self.units,)

    def init_params(self, rng):
        fan_in = self.input_shape[0]
        return {self.pname("W"): glorot_uniform(rng, (self.units, fan_in), fan_in, self.units),
                self.pname("b"): np.zeros(self.units)}

    def forward(self, x, params, mode, seed):
        self._cache = x
        return dense_forward(x, params[self.pname("W")], params[self.pname("b")])

    def backward(self, dy, params):
        dx, dW, db = dense_backward(dy, self._cache, params[self.pname("W")])
        return dx, {self.pname("W"): dW, self.pname("b"): db}


class Conv2D(Layer):
    has_params = True
    transpose = False

    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        hp = spec.hyperparams
        self.filters = int(hp["filters"])
        self.kernel = _pair(hp.get("kernel", 3), "kernel")
        self.stride = _pair(hp.get("stride", 1), "stride")
        self.pad = _pair(hp.get("pad", 0), "pad")
        if self.filters < 1 or min(self.kernel) < 1 or min(self.stride) < 1 or min(self.pad) < 0:
            raise ParameterError("invalid convolution hyperparameters for %s" % prefix)

    def output_shape(self, input_shape):
        if len(input_shape) != 3:
            raise ShapeError("%s expects an HxWxC input, got %s" % (self.prefix, input_shape))
        shape_fn = conv_transpose_output_shape if self.transpose else conv_output_shape
        return shape_fn(input_shape[0], input_shape[1], self.kernel, self.stride, self.pad) + (self.filters,)

    def kernel_shape(self):
        c_in = self.input_shape[2]
        if self.transpose:
            return self.kernel + (self.filters, c_in)
        return self.kernel + (c_in, self.filters)

    def init_params(self, rng):
        kh, kw = self.kernel
        c_in = self.input_shape[2]
        return {self.pname("kernel"): glorot_uniform(rng, self.kernel_shape(), kh * kw * c_in, kh * kw * self.filters),
                self.pname("bias"): np.zeros(self.filters)}

    def forward(self, x, params, mode, seed):
        self._cache = x
        fn = conv2d_transpose_forward if self.transpose else conv2d_forward
        return fn(x, params[self.pname("kernel")], self.stride, self.pad, params[self.pname("bias")])

    def backward(self, dy, params):
        fn = conv2d_transpose_backward if self.transpose else conv2d_backward
        dx, dk, db = fn(dy, self._cache, params[self.pname("kernel")], self.stride, self.pad)
        return dx, {self.pname("kernel"): dk, self.pname("bias"): db}


class Conv2DTranspose(Conv2D):
    transpose = True


class BatchNorm(Layer):
    has_params = True

    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        self.momentum = float(spec.hyperparams.get("momentum", 0.99))
        self.eps = float(spec.hyperparams.get("eps", 1e-5))
        if not 0.0 <= self.momentum < 1.0 or self.eps <= 0.0:
            raise ParameterError("invalid batch normalisation hyperparameters for %s" % prefix)

    def init_params(self, rng):
        channels = self.input_shape[-1]
        return {self.pname("gamma"): np.ones(channels), self.pname("beta"): np.zeros(channels)}

    def init_state(self):
        channels = self.input_shape[-1]
        return {self.pname("running_mean"): np.zeros(channels), self.pname("running_var"): np.ones(channels)}

    def forward(self, x, params, mode, seed):
        self._cache = (x, mode)
        return batchnorm_forward(x, params[self.pname("gamma")], params[self.pname("beta")], mode, self.eps,
                                 params[self.pname("running_mean")], params[self.pname("running_var")],
                                 self.momentum)

    def backward(self, dy, params):
        x, mode = self._cache
        dx, dgamma, dbeta = batchnorm_backward(dy, x, params[self.pname("gamma")], mode, self.eps,
                                               params[self.pname("running_mean")],
                                               params[self.pname("running_var")])
        return dx, {self.pname("gamma"): dgamma, self.pname("beta"): dbeta}


class LeakyReLU(Layer):
    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        self.slope = float(spec.hyperparams.get("slope", 0.3))
        if not 0.0 < self.slope < 1.0:
            raise ParameterError("leaky relu slope must lie in (0, 1)")

    def forward(self, x, params, mode, seed):
        self._cache = x
        return leaky_relu(x, self.slope)

    def backward(self, dy, params):
        return leaky_relu_backward(dy, self._cache, self.slope), {}


class Tanh(Layer):
    def forward(self, x, params, mode, seed):
        self._cache = tanh(x)
        return self._cache

    def backward(self, dy, params):
        return tanh_backward(dy, self._cache), {}


class Sigmoid(Layer):
    def forward(self, x, params, mode, seed):
        self._cache = sigmoid(x)
        return self._cache

    def backward(self, dy, params):
        return sigmoid_backward(dy, self._cache), {}


class Dropout(Layer):
    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        self.rate = float(spec.hyperparams["rate"])
        if not 0.0 <= self.rate < 1.0:
            raise ParameterError("dropout rate must lie in [0, 1)")

    def forward(self, x, params, mode, seed):
        _check_mode(mode)
        if mode == INFER or self.rate == 0.0:
            self._cache = None
            return x
        self._cache = dropout_mask(x.shape, self.rate, seed)
        return x * self._cache

    def backward(self, dy, params):
        return (dy if self._cache is None else dy * self._cache), {}


class Reshape(Layer):
    def __init__(self, spec, prefix):
        super().__init__(spec, prefix)
        self.target_shape = tuple(int(d) for d in spec.hyperparams["target_shape"])

    def output_shape(self, input_shape):
        if int(np.prod(input_shape)) != int(np.prod(self.target_shape)):
            raise ShapeError("cannot reshape %s into %s" % (input_shape, self.target_shape))
        return self.target_shape

    def forward(self, x, params, mode, seed):
        return x.reshape((x.shape[0],) + self.target_shape)

    def backward(self, dy, params):
        return dy.reshape((dy.shape[0],) + self.input_shape), {}


class Flatten(Layer):
    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)

    def forward(self, x, params, mode, seed):
        return x.reshape(x.shape[0], -1)

    def backward(self, dy, params):
        return dy.reshape((dy.shape[0],) + self.input_shape), {}


LAYER_CLASSES = {
    "dense": Dense,
    "conv2d": Conv2D,
    "conv2d_transpose": Conv2DTranspose,
    "batchnorm": BatchNorm,
    "leaky_relu": LeakyReLU,
    "tanh": Tanh,
    "sigmoid": Sigmoid,
    "dropout": Dropout,
    "reshape": Reshape,
    "flatten": Flatten,
}


def build_layer(spec, prefix):
    return LAYER_CLASSES[spec.kind](spec, prefix)
