"""
Adam, the optimizer used for the generator, the discriminator, the BiLSTM and the latent search.

Date: Oct 2026

"""

from dataclasses import dataclass, field

import numpy as np

from pdmtools.exceptions import ParameterError, ShapeError


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, grads, state, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-7):
    """
    One bias-corrected Adam update, applied in place.

    :param params: mapping name -> array (a ParameterStore or a plain dict)
    :param grads: mapping name -> gradient, a subset of params
    :param state: AdamState, updated in place
    :return: params
    """
    if lr <= 0 or not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0 or eps <= 0:
        raise ParameterError("invalid Adam settings lr=%r beta1=%r beta2=%r eps=%r" % (lr, beta1, beta2, eps))

    state.step += 1
    t = state.step
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    for name, g in grads.items():
        p = params[name]
        if np.shape(g) != p.shape:
            raise ShapeError("gradient for '%s' has shape %s, parameter has %s" % (name, np.shape(g), p.shape))
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        p -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return params


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()

    def step(self, params, grads):
        return adam_step(params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps)
