"""
Parameter storage and a sequential network with a recorded forward pass and exact reverse-mode
gradients.

Date: Oct 2026

"""

import logging
from collections import OrderedDict

import numpy as np

from pdmtools.exceptions import NumericError, ParameterError, ShapeError, ValidationError
from pdmtools.layers import INFER, TRAIN, build_layer

logger = logging.getLogger(__name__)

MAX_RANK = 4


class ParameterStore:
    """
    Named, shaped float64 arrays in insertion order.
    """

    def __init__(self, rng_seed=0):
        self.entries = OrderedDict()
        self.rng_seed = int(rng_seed)

    def add(self, name, array):
        if name in self.entries:
            raise ValidationError("parameter '%s' already exists" % name)
        array = np.array(array, dtype=np.float64)
        if array.ndim == 0 or array.ndim > MAX_RANK or array.size == 0:
            raise ShapeError("parameter '%s' has unsupported shape %s" % (name, array.shape))
        if not np.all(np.isfinite(array)):
            raise ValidationError("parameter '%s' has non-finite values" % name)
        self.entries[name] = array

    def __getitem__(self, name):
        return self.entries[name]

    def __contains__(self, name):
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def names(self):
        return list(self.entries)

    def shapes(self):
        return OrderedDict((k, v.shape) for k, v in self.entries.items())

    def copy(self):
        other = ParameterStore(self.rng_seed)
        for name, array in self.entries.items():
            other.entries[name] = array.copy()
        return other

    def assign(self, other):
        """
        Overwrite values in place from another store (or mapping) with identical names and shapes.
        """
        for name, array in other.items():
            if name not in self.entries:
                raise ValidationError("unknown parameter '%s'" % name)
            if self.entries[name].shape != np.shape(array):
                raise ShapeError("parameter '%s' has shape %s, got %s"
                                 % (name, self.entries[name].shape, np.shape(array)))
            self.entries[name][...] = array

    def subset(self, prefix):
        other = ParameterStore(self.rng_seed)
        for name, array in self.entries.items():
            if name.startswith(prefix + "."):
                other.entries[name] = array
        return other

    def validate(self):
        for name, array in self.entries.items():
            if not np.all(np.isfinite(array)):
                raise ValidationError("parameter '%s' has non-finite values" % name)

    @staticmethod
    def merge(*stores):
        merged = ParameterStore(stores[0].rng_seed if stores else 0)
        for store in stores:
            for name, array in store.items():
                merged.add(name, array)
        return merged


class Network:
    """
    A chain of layers built from LayerSpecs.

    :param specs: list of LayerSpec
    :param input_shape: per-sample input shape, e.g. (100,) or (9, 4, 1)
    :param prefix: parameter name prefix, e.g. "gen"
    :param seed: seeds parameter initialisation and the dropout seed sequence
    :param params: optional ParameterStore to use instead of a fresh initialisation
    """

    def __init__(self, specs, input_shape, prefix, seed=0, params=None):
        self.prefix = prefix
        self.input_shape = tuple(input_shape)
        self.layers = []
        shape = self.input_shape
        for index, spec in enumerate(specs):
            name = spec.name or "%s%d" % (spec.kind, index)
            layer = build_layer(spec, prefix + "." + name)
            shape = layer.build(shape)
            self.layers.append(layer)
        self.output_shape = tuple(shape)

        self.trainable = []
        fresh = ParameterStore(seed)
        init_rng = np.random.default_rng(seed)
        for layer in self.layers:
            for name, array in layer.init_params(init_rng).items():
                fresh.add(name, array)
                self.trainable.append(name)
            for name, array in layer.init_state().items():
                fresh.add(name, array)

        if params is None:
            self.params = fresh
        else:
            if params.shapes() != fresh.shapes():
                raise ShapeError("stored parameters do not match the architecture of '%s'" % prefix)
            self.params = params

        self._dropout_rng = np.random.default_rng([int(seed), 1])
        self._recorded = False

    def num_parameters(self):
        return int(sum(self.params[name].size for name in self.trainable))

    def forward(self, x, mode=INFER, seed=None):
        """
        Run the chain on a batch and record what backward needs.

        :param x: array (batch,) + input_shape
        :param mode: "train" or "infer"
        :param seed: dropout seed; drawn from the network's own sequence when omitted
        :return: array (batch,) + output_shape
        """
        if mode not in (TRAIN, INFER):
            raise ParameterError("mode must be 'train' or 'infer'")
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ShapeError("network '%s' expects inputs of shape %s, got %s"
                             % (self.prefix, self.input_shape, x.shape[1:]))
        if seed is None:
            seed = int(self._dropout_rng.integers(2 ** 63 - 1))

        for index, layer in enumerate(self.layers):
            x = layer.forward(x, self.params, mode, (int(seed), index))
            if not np.all(np.isfinite(x)):
                raise NumericError(layer.prefix)
        self._recorded = True
        return x

    def backward(self, dout):
        """
        Reverse-mode pass through the recorded forward.

        :param dout: gradient of the loss with respect to the last forward output
        :return: (dict of trainable parameter name -> gradient, gradient w.r.t. the input)
        """
        if not self._recorded:
            raise ValidationError("backward called before forward on '%s'" % self.prefix)
        grads = {}
        dx = np.asarray(dout, dtype=np.float64)
        for layer in reversed(self.layers):
            dx, layer_grads = layer.backward(dx, self.params)
            if not np.all(np.isfinite(dx)):
                raise NumericError(layer.prefix, stage="backward")
            grads.update(layer_grads)
        return grads, dx

    def loss_and_gradients(self, x, loss_fn, mode=INFER, seed=None):
        """
        :param loss_fn: callable(output) -> (scalar loss, dloss/doutput)
        :return: (loss, parameter gradients, input gradient)
        """
        out = self.forward(x, mode, seed)
        loss, dout = loss_fn(out)
        if not np.isfinite(loss):
            raise NumericError(self.prefix + " loss")
        grads, dx = self.backward(dout)
        return loss, grads, dx
