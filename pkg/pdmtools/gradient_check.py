"""
Central finite-difference gradient checks for the layers, the networks built from them and the
BiLSTM.

Date: Oct 2026

"""

import logging

import numpy as np

from pdmtools.bilstm import BiLstmModel
from pdmtools.layers import INFER, TRAIN, LayerSpec
from pdmtools.network import Network

logger = logging.getLogger(__name__)

STEP = 1e-4


def numerical_grad(f, x, h=STEP):
    """
    Central differences of a scalar function with respect to every element of x.
    x is perturbed in place and restored.

    :param f: callable with no arguments returning a float; must read x
    :param x: float64 array
    :param h: step
    :return: array shaped like x
    """
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = f()
        flat[i] = original - h
        minus = f()
        flat[i] = original
        gflat[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    """
    ||a - n|| / (||a|| + ||n||), zero when both vanish.
    """
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def check_network_gradients(network, x, mode=TRAIN, seed=0, h=STEP, rng=None):
    """
    Compare backward() with central differences for every trainable parameter and the input,
    using the loss sum(output * R) for a fixed random R.

    :return: dict name -> relative error, the input under key "input"
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.array(x, dtype=np.float64)
    out = network.forward(x, mode, seed)
    projection = rng.standard_normal(out.shape)

    def loss():
        return float(np.sum(network.forward(x, mode, seed) * projection))

    network.forward(x, mode, seed)
    grads, dx = network.backward(projection)

    errors = {}
    for name in network.trainable:
        errors[name] = relative_error(grads[name], numerical_grad(loss, network.params[name], h))
    errors["input"] = relative_error(dx, numerical_grad(loss, x, h))
    return errors


def _away_from_zero(rng, shape, margin=1e-2):
    x = rng.uniform(-1.0, 1.0, size=shape)
    return np.where(np.abs(x) < margin, np.sign(x + 1e-12) * margin, x)


def layer_kind_cases(seed=0):
    """
    One small randomised network per layer kind, with a matching input batch and mode.

    :return: list of (kind, network, x, mode)
    """
    rng = np.random.default_rng(seed)
    cases = [
        ("dense", [LayerSpec("dense", {"units": 3})], (5,), INFER),
        ("conv2d", [LayerSpec("conv2d", {"filters": 2, "kernel": 3, "stride": (2, 1), "pad": 1})], (9, 4, 1), INFER),
        ("conv2d_transpose", [LayerSpec("conv2d_transpose", {"filters": 2, "kernel": 3, "stride": (2, 1), "pad": 1})],
         (5, 4, 3), INFER),
        ("batchnorm", [LayerSpec("batchnorm")], (3, 2, 2), TRAIN),
        # no layer in front, so the kink at zero stays out of the difference stencil
        ("leaky_relu", [LayerSpec("leaky_relu", {"slope": 0.3})], (4,), INFER),
        ("tanh", [LayerSpec("dense", {"units": 4}), LayerSpec("tanh")], (3,), INFER),
        ("sigmoid", [LayerSpec("dense", {"units": 4}), LayerSpec("sigmoid")], (3,), INFER),
        ("dropout", [LayerSpec("dense", {"units": 4}), LayerSpec("dropout", {"rate": 0.3})], (3,), TRAIN),
        ("reshape", [LayerSpec("reshape", {"target_shape": (2, 3, 1)}), LayerSpec("conv2d", {"filters": 1, "kernel": 2})],
         (6,), INFER),
        ("flatten", [LayerSpec("flatten"), LayerSpec("dense", {"units": 2})], (2, 2, 2), INFER),
    ]
    built = []
    for kind, specs, shape, mode in cases:
        network = Network(specs, shape, "check", seed=int(rng.integers(1 << 31)))
        for name in network.trainable:
            network.params[name][...] = rng.uniform(-1.0, 1.0, size=network.params[name].shape)
        x = _away_from_zero(rng, (3,) + shape) if kind == "leaky_relu" else rng.uniform(-1.0, 1.0, (3,) + shape)
        built.append((kind, network, x, mode))
    return built


def check_layer_kinds(seed=0, trials=1):
    """
    Worst relative error per layer kind over `trials` randomised instances.

    :return: dict kind -> worst relative error
    """
    worst = {}
    for trial in range(trials):
        for kind, network, x, mode in layer_kind_cases(seed + trial):
            errors = check_network_gradients(network, x, mode, seed=trial, rng=np.random.default_rng(trial))
            worst[kind] = max(worst.get(kind, 0.0), max(errors.values()))
            logger.debug("%s trial %d: %s", kind, trial, errors)
    return worst


def check_bilstm_gradients(seed=0, hidden_size=3, steps=9, num_features=4, batch=2, h=STEP):
    """
    Finite-difference check of BiLstmModel.loss_and_gradients over a full window roll-out.

    :return: dict parameter name -> relative error, the input under key "input"
    """
    rng = np.random.default_rng(seed)
    model = BiLstmModel.initialise(num_features, hidden_size, seed)
    for name in model.params:
        model.params[name][...] = rng.uniform(-0.5, 0.5, size=model.params[name].shape)
    x = rng.uniform(-1.0, 1.0, (batch, steps, num_features))
    target = rng.uniform(-1.0, 1.0, (batch, steps, num_features))

    def loss():
        return model.loss_and_gradients(x, target)[0]

    _, grads, dx = model.loss_and_gradients(x, target)
    errors = {name: relative_error(grads[name], numerical_grad(loss, model.params[name], h)) for name in model.params}
    errors["input"] = relative_error(dx, numerical_grad(loss, x, h))
    return errors
